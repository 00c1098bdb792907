#include "klim/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klim/error.hpp"

namespace klim {

TimeChange TimeChange::exponential(double t0) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw PreconditionError("time change needs t0 > 0");
    return TimeChange(Kind::exponential, t0, 0.5, std::numeric_limits<double>::infinity());
}

TimeChange TimeChange::power(double t0, double q, double tol) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw PreconditionError("time change needs t0 > 0");
    if (!std::isfinite(q)) throw PreconditionError("time change needs a finite q");
    if (std::abs(2.0 * q - 1.0) <= tol) return exponential(t0);
    const double t1 = 2.0 * q > 1.0 ? std::pow(t0, 1.0 - 2.0 * q) / (2.0 * q - 1.0)
                                    : std::numeric_limits<double>::infinity();
    return TimeChange(Kind::power, t0, q, t1);
}

void TimeChange::check_domain(double s) const {
    if (!(s >= 0.0) || !(s < t1_)) {
        std::ostringstream msg;
        msg << "time-change argument s=" << s << " outside [0, t1) with t1=" << t1_;
        throw RangeError(msg.str());
    }
}

double TimeChange::phi(double s) const {
    check_domain(s);
    if (kind_ == Kind::exponential) return t0_ * std::exp(s);
    const double a = 1.0 - 2.0 * q_;
    return std::pow(std::pow(t0_, a) + a * s, 1.0 / a);
}

double TimeChange::phi_prime(double s) const {
    const double p = phi(s);
    if (kind_ == Kind::exponential) return p;
    return std::pow(p, 2.0 * q_);
}

double TimeChange::phi_second(double s) const {
    // (phi^{2q})' = 2q phi^{2q-1} phi' = 2q phi^{4q-1}
    const double p = phi(s);
    if (kind_ == Kind::exponential) return p;
    return 2.0 * q_ * std::pow(p, 4.0 * q_ - 1.0);
}

double TimeChange::phi_inverse(double t) const {
    if (!(t >= t0_) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg << "phi_inverse argument t=" << t << " below t0=" << t0_;
        throw RangeError(msg.str());
    }
    if (kind_ == Kind::exponential) return std::log(t / t0_);
    const double a = 1.0 - 2.0 * q_;
    return (std::pow(t, a) - std::pow(t0_, a)) / a;
}

double power_time_gap(double q, double s, double t, double eps) {
    const double a = 1.0 - 2.0 * q;
    if (a == 0.0) throw PreconditionError("power time gap undefined for 2q = 1");
    if (!(eps > 0.0) || !(s > 0.0) || !(t > 0.0)) throw PreconditionError("power time gap needs s, t, eps > 0");
    return (std::pow(t, a) - std::pow(s, a)) / (a * std::pow(eps, a));
}

namespace {

double sample_linear(const TimeGrid& grid, std::span<const double> row, double t) {
    if (auto k = grid.find_node(t, 1e-12)) return row[*k];
    const std::size_t k = grid.locate(t);
    const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
    return (1.0 - w) * row[k] + w * row[k + 1];
}

// Shared driver: out(s_j) = factor_j * source(time_j).
PathBundle remap(const PathBundle& src, const TimeGrid& out_grid, const std::vector<double>& source_times,
                 const std::vector<double>& factors) {
    const double lo = src.grid.t_start();
    const double hi = src.grid.t_end();
    for (double t : source_times) {
        const double tol = 1e-12 * std::max(1.0, std::abs(t));
        if (t < lo - tol || t > hi + tol) {
            std::ostringstream msg;
            msg << "mapped time " << t << " leaves the simulated window [" << lo << ", " << hi << "]";
            throw RangeError(msg.str());
        }
    }
    PathBundle out(out_grid, src.n_paths);
    out.explosion_threshold = src.explosion_threshold;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < src.n_paths; ++i) {
        auto vrow = src.v_row(i);
        auto xrow = src.x_row(i);
        for (std::size_t j = 0; j < out_grid.size(); ++j) {
            const double t = std::clamp(source_times[j], lo, hi);
            out.v_at(i, j) = factors[j] * sample_linear(src.grid, vrow, t);
            out.x_at(i, j) = factors[j] * sample_linear(src.grid, xrow, t);
        }
        if (src.exploded[i]) {
            out.exploded[i] = 1;
            out.explosion_time[i] = src.explosion_time[i];
            const double last_valid = src.grid[static_cast<std::size_t>(src.explosion_index[i]) - 1];
            std::int64_t first_bad = static_cast<std::int64_t>(out_grid.size());
            for (std::size_t j = 0; j < out_grid.size(); ++j) {
                if (source_times[j] > last_valid + 1e-12 * std::max(1.0, std::abs(last_valid))) {
                    first_bad = static_cast<std::int64_t>(j);
                    break;
                }
            }
            out.explosion_index[i] = first_bad;
            for (std::size_t j = static_cast<std::size_t>(first_bad); j < out_grid.size(); ++j) {
                out.v_at(i, j) = nan;
                out.x_at(i, j) = nan;
            }
        }
    }
    return out;
}

}  // namespace

PathBundle apply_scaling(const PathBundle& bundle, const TimeChange& tc, const TimeGrid& s_grid) {
    std::vector<double> times(s_grid.size());
    std::vector<double> factors(s_grid.size());
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        times[j] = tc.phi(s_grid[j]);
        factors[j] = 1.0 / std::sqrt(tc.phi_prime(s_grid[j]));
    }
    return remap(bundle, s_grid, times, factors);
}

PathBundle inverse_scaling(const PathBundle& bundle, const TimeChange& tc, const TimeGrid& t_grid) {
    std::vector<double> times(t_grid.size());
    std::vector<double> factors(t_grid.size());
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        const double s = tc.phi_inverse(t_grid[j]);
        times[j] = s;
        factors[j] = std::sqrt(tc.phi_prime(s));
    }
    return remap(bundle, t_grid, times, factors);
}

TimeGrid pullback_grid(const TimeChange& tc, const TimeGrid& t_grid) {
    std::vector<double> nodes(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) nodes[k] = tc.phi_inverse(t_grid[k]);
    nodes.front() = std::max(0.0, nodes.front());
    return TimeGrid::from_nodes(std::move(nodes));
}

TimeGrid pushforward_grid(const TimeChange& tc, const TimeGrid& s_grid) {
    std::vector<double> nodes(s_grid.size());
    for (std::size_t k = 0; k < s_grid.size(); ++k) nodes[k] = tc.phi(s_grid[k]);
    return TimeGrid::from_nodes(std::move(nodes));
}

}  // namespace klim
