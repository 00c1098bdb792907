#include "klim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klim/error.hpp"
#include "klim/parallel.hpp"
#include "klim/timechange.hpp"

namespace klim {

std::string_view to_string(Scheme scheme) noexcept {
    switch (scheme) {
        case Scheme::automatic: return "auto";
        case Scheme::euler: return "euler";
        case Scheme::tamed_euler: return "tamed_euler";
    }
    return "auto";
}

Scheme scheme_from_string(std::string_view name) {
    if (name == "auto") return Scheme::automatic;
    if (name == "euler") return Scheme::euler;
    if (name == "tamed_euler" || name == "tamed") return Scheme::tamed_euler;
    throw PreconditionError("unknown scheme '" + std::string(name) + "'");
}

namespace {

Scheme resolve(Scheme scheme, double gamma) noexcept {
    if (scheme != Scheme::automatic) return scheme;
    return gamma > 1.0 ? Scheme::tamed_euler : Scheme::euler;
}

struct StepTables {
    std::vector<double> dt;
    std::vector<double> sqrt_dt;

    explicit StepTables(const TimeGrid& grid) : dt(grid.n_steps()), sqrt_dt(grid.n_steps()) {
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            dt[k] = grid[k + 1] - grid[k];
            sqrt_dt[k] = std::sqrt(dt[k]);
        }
    }
};

// Drives every path through `step(k, v, z) -> v_next` with z ~ N(0, 1) from the
// path's own substream, records the requested columns and tracks explosions.
template <class Step>
PathBundle run_paths(const TimeGrid& grid, std::size_t n_paths, const RngPolicy& rng, const InitialValues& v0,
                     double x0, const SimOptions& options, const Step& step) {
    if (n_paths == 0) throw PreconditionError("n_paths must be positive");
    if (v0.size() != 1 && v0.size() != n_paths)
        throw PreconditionError("initial values must be a single value or one per path");
    if (!(options.explosion_threshold > 0.0)) throw PreconditionError("explosion threshold must be positive");

    std::vector<std::size_t> record = options.record;
    if (record.empty()) {
        record.resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) record[k] = k;
    }
    record.push_back(0);
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());
    if (record.back() >= grid.size()) throw RangeError("recorded index beyond the end of the grid");
    if (record.size() < 2) record.push_back(grid.n_steps());

    std::vector<std::int64_t> column_of(grid.size(), -1);
    for (std::size_t c = 0; c < record.size(); ++c) column_of[record[c]] = static_cast<std::int64_t>(c);

    PathBundle bundle(grid.subgrid(record), n_paths);
    bundle.explosion_threshold = options.explosion_threshold;
    const double threshold = options.explosion_threshold;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n_steps = grid.n_steps();
    const std::size_t last_recorded = record.back();

    parallel_for(n_paths, options.threads, [&](std::size_t i) {
        Substream noise(rng, StreamDomain::path_noise, i);
        double v = v0[i];
        double x = x0;
        bundle.v_at(i, 0) = v;
        bundle.x_at(i, 0) = x;
        std::size_t filled = 1;
        for (std::size_t k = 0; k < std::min(n_steps, last_recorded); ++k) {
            const double v_next = step(k, v, noise.normal());
            if (!(std::abs(v_next) <= threshold)) {
                bundle.exploded[i] = 1;
                bundle.explosion_index[i] = static_cast<std::int64_t>(filled);
                bundle.explosion_time[i] = grid[k + 1];
                for (std::size_t c = filled; c < bundle.n_times(); ++c) {
                    bundle.v_at(i, c) = nan;
                    bundle.x_at(i, c) = nan;
                }
                return;
            }
            x += 0.5 * (grid[k + 1] - grid[k]) * (v + v_next);
            v = v_next;
            if (const auto c = column_of[k + 1]; c >= 0) {
                bundle.v_at(i, static_cast<std::size_t>(c)) = v;
                bundle.x_at(i, static_cast<std::size_t>(c)) = x;
                ++filled;
            }
        }
    });

    if (bundle.exploded_count() == n_paths) {
        std::ostringstream msg;
        msg << "all " << n_paths << " paths crossed the explosion threshold " << threshold;
        throw ExplosionError(1.0, msg.str());
    }
    return bundle;
}

// Euler / tamed-Euler step for dV = b(k, V) dt + dW.
template <class Drift>
auto euler_step(const StepTables& tables, Scheme scheme, Drift drift) {
    return [&tables, scheme, drift](std::size_t k, double v, double z) {
        const double dt = tables.dt[k];
        const double b = drift(k, v);
        const double increment = scheme == Scheme::tamed_euler ? b * dt / (1.0 + dt * std::abs(b)) : b * dt;
        return v + increment + tables.sqrt_dt[k] * z;
    };
}

}  // namespace

PathBundle simulate_ske(const ModelSpec& spec, const TimeGrid& grid, std::size_t n_paths, const RngPolicy& rng,
                        const SimOptions& options) {
    spec.validate();
    if (std::abs(grid.t_start() - spec.t0) > 1e-12 * std::max(1.0, spec.t0))
        throw PreconditionError("simulation grid must start at t0");
    const StepTables tables(grid);
    std::vector<double> time_factor(grid.n_steps());
    for (std::size_t k = 0; k < grid.n_steps(); ++k) time_factor[k] = std::pow(grid[k], -spec.beta);
    const DriftSpec& drift = spec.drift;
    auto step = euler_step(tables, resolve(options.scheme, drift.gamma()),
                           [&](std::size_t k, double v) { return -time_factor[k] * drift(v); });
    return run_paths(grid, n_paths, rng, spec.v0, spec.x0, options, step);
}

PathBundle simulate_exponential_homogenized(const ModelSpec& spec, const TimeGrid& s_grid, std::size_t n_paths,
                                            const RngPolicy& rng, const InitialValues& h0,
                                            const SimOptions& options) {
    const Regime regime = classify_regime(spec);
    if (regime.tag != RegimeTag::critical) {
        std::ostringstream msg;
        msg << "exponential homogenization needs the critical regime q = 1/2, got q = " << regime.q;
        throw PreconditionError(msg.str());
    }
    if (!spec.drift.is_homogeneous()) throw PreconditionError("critical homogenization needs a homogeneous drift");
    const StepTables tables(s_grid);
    const DriftSpec& drift = spec.drift;
    auto step = euler_step(tables, resolve(options.scheme, drift.gamma()),
                           [&](std::size_t, double h) { return -0.5 * h - drift(h); });
    return run_paths(s_grid, n_paths, rng, h0, 0.0, options, step);
}

PathBundle simulate_power_homogenized(const DriftSpec& drift, const TimeGrid& s_grid, std::size_t n_paths,
                                      const RngPolicy& rng, const InitialValues& h0, const SimOptions& options) {
    if (!drift.is_homogeneous() || drift.gamma() < 1.0 || !(drift.f_plus() > 0.0) ||
        drift.f_minus() != -drift.f_plus())
        throw PreconditionError("power homogenization needs F = rho sgn(v)|v|^gamma with rho > 0, gamma >= 1");
    const StepTables tables(s_grid);
    auto step = euler_step(tables, resolve(options.scheme, drift.gamma()),
                           [&](std::size_t, double h) { return -drift(h); });
    return run_paths(s_grid, n_paths, rng, h0, 0.0, options, step);
}

PathBundle simulate_power_changed_time(const ModelSpec& spec, const TimeGrid& s_grid, std::size_t n_paths,
                                       const RngPolicy& rng, const SimOptions& options) {
    spec.validate();
    const double q = spec.q();
    const TimeChange tc = TimeChange::power(spec.t0, q);
    if (tc.kind() != TimeChange::Kind::power)
        throw PreconditionError("power change of time needs 2q != 1; use the exponential homogenization");
    const double gamma = spec.drift.gamma();
    std::vector<double> drift_scale(s_grid.n_steps());
    std::vector<double> inner_scale(s_grid.n_steps());
    std::vector<double> linear_rate(s_grid.n_steps());
    for (std::size_t k = 0; k < s_grid.n_steps(); ++k) {
        const double p = tc.phi(s_grid[k]);
        drift_scale[k] = std::pow(p, -gamma * q);
        inner_scale[k] = std::sqrt(tc.phi_prime(s_grid[k]));
        linear_rate[k] = q * std::pow(p, 2.0 * q - 1.0);
    }
    if (!(s_grid.t_end() < tc.t1())) throw RangeError("s-grid reaches the end t1 of the time-change domain");
    const StepTables tables(s_grid);
    const DriftSpec& drift = spec.drift;
    auto step = euler_step(tables, resolve(options.scheme, gamma), [&](std::size_t k, double v) {
        return -drift_scale[k] * drift(inner_scale[k] * v) - linear_rate[k] * v;
    });
    const double h0 = spec.v0 / std::pow(spec.t0, q);
    return run_paths(s_grid, n_paths, rng, h0, 0.0, options, step);
}

PathBundle simulate_ou_exact(double theta, double sigma, const TimeGrid& grid, std::size_t n_paths,
                             const RngPolicy& rng, const InitialValues& h0, const SimOptions& options) {
    if (!(theta > 0.0) || !(sigma > 0.0) || !std::isfinite(theta) || !std::isfinite(sigma))
        throw PreconditionError("OU parameters need theta > 0 and sigma > 0");
    std::vector<double> decay(grid.n_steps());
    std::vector<double> spread(grid.n_steps());
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const double dt = grid[k + 1] - grid[k];
        decay[k] = std::exp(-theta * dt);
        spread[k] = sigma * std::sqrt(-std::expm1(-2.0 * theta * dt) / (2.0 * theta));
    }
    auto step = [&](std::size_t k, double h, double z) { return decay[k] * h + spread[k] * z; };
    return run_paths(grid, n_paths, rng, h0, 0.0, options, step);
}

}  // namespace klim
