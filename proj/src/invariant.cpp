#include "klim/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "klim/error.hpp"
#include "klim/parallel.hpp"

namespace klim {

namespace {

constexpr double kTailDrop = 60.0;
constexpr std::size_t kPanelsPerSide = 128;
constexpr std::size_t kSampleBlock = 1024;
// The peak-scaled integrand is at most 1, so this bounds each panel's absolute error by its width.
constexpr double kAbsTolPerWidth = 1e-14;

using Adaptive = boost::math::quadrature::gauss_kronrod<double, 31>;
using Fixed = boost::math::quadrature::gauss_kronrod<double, 15>;

// Accepts when the error estimate is below rel_tol * |integral| or below abs_tol.
template <class F>
double integrate_adaptive(F f, double a, double b, double rel_tol, double abs_tol = 0.0) {
    if (a == b) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    const double value = Adaptive::integrate(f, a, b, 20, rel_tol, &err, &l1);
    if (!std::isfinite(value) || err > std::max(rel_tol * l1, abs_tol)) {
        std::ostringstream msg;
        msg << "adaptive quadrature did not converge on [" << a << ", " << b << "]: error estimate " << err
            << " for integral " << l1;
        throw QuadratureError(msg.str());
    }
    return value;
}

}  // namespace

struct DensitySpec::State {
    Family family = Family::generic;
    std::string name;
    std::function<double(double)> log_density;
    double mode_hint = 0.0;

    // Lambda_F: coefficients of the |x|^{gamma+1} term on each side.
    // Pi_F: rho in c_plus, gamma in gamma.
    double c_plus = 0.0;
    double c_minus = 0.0;
    double gamma = 0.0;
    bool sampler_ok = false;

    std::once_flag once;
    double log_peak = 0.0;
    double mode = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double log_z = 0.0;
    double z_scaled = 0.0;  // Z / exp(log_peak)
    std::vector<double> knots;
    std::vector<double> cumulative;  // unnormalized mass left of each knot, scaled by exp(-log_peak)

    double scaled(double x) const { return std::exp(log_density(x) - log_peak); }

    void build() {
        // Peak search over a symmetric geometric grid around the hint.
        mode = mode_hint;
        log_peak = log_density(mode);
        for (double r = 1e-4; r <= 1e4; r *= 1.05) {
            for (double x : {mode_hint - r, mode_hint + r}) {
                const double l = log_density(x);
                if (std::isfinite(l) && l > log_peak) {
                    log_peak = l;
                    mode = x;
                }
            }
        }
        if (!std::isfinite(log_peak)) throw QuadratureError(name + ": log-density is not finite at its mode");

        auto edge = [&](double direction) {
            double step = 1.0;
            double inner = mode;
            double outer = mode + direction * step;
            while (log_density(outer) > log_peak - kTailDrop) {
                inner = outer;
                step *= 2.0;
                outer = mode + direction * step;
                if (step > 1e8) throw QuadratureError(name + ": density is not integrable (no tail decay)");
            }
            for (int it = 0; it < 200 && std::abs(outer - inner) > 1e-12 * std::max(1.0, std::abs(outer)); ++it) {
                const double mid = 0.5 * (inner + outer);
                (log_density(mid) > log_peak - kTailDrop ? inner : outer) = mid;
            }
            return outer;
        };
        lo = edge(-1.0);
        hi = edge(+1.0);

        knots.clear();
        for (std::size_t k = 0; k < kPanelsPerSide; ++k)
            knots.push_back(lo + (mode - lo) * static_cast<double>(k) / kPanelsPerSide);
        for (std::size_t k = 0; k <= kPanelsPerSide; ++k)
            knots.push_back(mode + (hi - mode) * static_cast<double>(k) / kPanelsPerSide);
        knots.back() = hi;

        auto f = [this](double x) { return scaled(x); };
        cumulative.assign(knots.size(), 0.0);
        for (std::size_t k = 1; k < knots.size(); ++k)
            cumulative[k] = cumulative[k - 1] + integrate_adaptive(f, knots[k - 1], knots[k], 1e-12,
                                                                   kAbsTolPerWidth * (knots[k] - knots[k - 1]));

        // Independent whole-range integral guards the panel sum.
        const double whole = integrate_adaptive(f, lo, mode, 1e-12, kAbsTolPerWidth * (mode - lo)) +
                             integrate_adaptive(f, mode, hi, 1e-12, kAbsTolPerWidth * (hi - mode));
        z_scaled = cumulative.back();
        if (std::abs(whole - z_scaled) > 1e-10 * z_scaled)
            throw QuadratureError(name + ": normalization quadrature is inconsistent");
        log_z = log_peak + std::log(z_scaled);
    }
};

DensitySpec DensitySpec::lambda_f(const DriftSpec& drift) {
    if (!drift.is_homogeneous()) throw PreconditionError("Lambda_F needs a homogeneous drift");
    auto s = std::make_shared<State>();
    s->family = Family::lambda_f;
    s->name = "Lambda_F";
    s->gamma = drift.gamma();
    const double p = drift.gamma() + 1.0;
    // sgn(x) F(sgn x): F(1) for x > 0, -F(-1) for x < 0.
    s->c_plus = 2.0 / p * drift.f_plus();
    s->c_minus = -2.0 / p * drift.f_minus();
    s->sampler_ok = drift.dissipative();
    s->log_density = [cp = s->c_plus, cm = s->c_minus, p](double x) {
        const double a = std::abs(x);
        return -0.5 * x * x - (x > 0.0 ? cp : (x < 0.0 ? cm : 0.0)) * std::pow(a, p);
    };
    return DensitySpec(std::move(s));
}

DensitySpec DensitySpec::pi_f(double rho, double gamma) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw PreconditionError("Pi_F needs rho > 0");
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw PreconditionError("Pi_F needs gamma >= 1");
    auto s = std::make_shared<State>();
    s->family = Family::pi_f;
    s->name = "Pi_F";
    s->c_plus = rho;
    s->gamma = gamma;
    s->sampler_ok = true;
    const double p = gamma + 1.0;
    const double a = 2.0 * rho / p;
    s->log_density = [a, p](double x) { return -a * std::pow(std::abs(x), p); };
    return DensitySpec(std::move(s));
}

DensitySpec DensitySpec::from_log_density(std::function<double(double)> log_density, std::string name,
                                          double mode) {
    auto s = std::make_shared<State>();
    s->family = Family::generic;
    s->name = std::move(name);
    s->log_density = std::move(log_density);
    s->mode_hint = mode;
    return DensitySpec(std::move(s));
}

DensitySpec::Family DensitySpec::family() const noexcept { return state_->family; }
const std::string& DensitySpec::name() const noexcept { return state_->name; }
double DensitySpec::log_unnormalized(double x) const { return state_->log_density(x); }

const DensitySpec::State& DensitySpec::ready() const {
    std::call_once(state_->once, [this] { state_->build(); });
    return *state_;
}

double DensitySpec::normalization() const { return std::exp(ready().log_z); }

double DensitySpec::pdf(double x) const {
    const State& s = ready();
    return std::exp(s.log_density(x) - s.log_z);
}

double DensitySpec::cdf(double x) const {
    const State& s = ready();
    if (!(x > s.lo)) return std::isnan(x) ? x : 0.0;
    if (x >= s.hi) return 1.0;
    auto it = std::upper_bound(s.knots.begin(), s.knots.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - s.knots.begin()) - 1;
    const double partial = x > s.knots[k] ? Fixed::integrate([&s](double y) { return s.scaled(y); }, s.knots[k], x)
                                          : 0.0;
    return std::clamp((s.cumulative[k] + partial) / s.z_scaled, 0.0, 1.0);
}

double DensitySpec::quantile(double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("quantile level must lie in [0, 1]");
    const State& s = ready();
    double a = s.lo;
    double b = s.hi;
    while (b - a > 1e-10) {
        const double mid = 0.5 * (a + b);
        (cdf(mid) < p ? a : b) = mid;
    }
    return 0.5 * (a + b);
}

double DensitySpec::moment(int k) const {
    const State& s = ready();
    auto f = [&s, k](double x) { return std::pow(x, k) * s.scaled(x); };
    const double reach = std::pow(std::max({1.0, std::abs(s.lo), std::abs(s.hi)}), k);
    const double left = integrate_adaptive(f, s.lo, s.mode, 1e-11, kAbsTolPerWidth * reach * (s.mode - s.lo));
    const double right = integrate_adaptive(f, s.mode, s.hi, 1e-11, kAbsTolPerWidth * reach * (s.hi - s.mode));
    return (left + right) / s.z_scaled;
}

double DensitySpec::variance() const {
    const double m1 = moment(1);
    return moment(2) - m1 * m1;
}

std::pair<double, double> DensitySpec::support() const {
    const State& s = ready();
    return {s.lo, s.hi};
}

std::vector<double> DensitySpec::sample(std::size_t n, const RngPolicy& rng, unsigned threads) const {
    const State& s = *state_;
    if (s.family == Family::generic) throw UnsupportedError(s.name + ": no sampler for a generic density");
    if (!s.sampler_ok)
        throw UnsupportedError(s.name + ": rejection sampler needs a dissipative drift (envelope bound fails)");
    std::vector<double> out(n);
    const std::size_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    const double p = s.gamma + 1.0;

    parallel_for(blocks, threads, [&](std::size_t block) {
        Substream stream(rng, StreamDomain::density_sampler, block);
        const std::size_t begin = block * kSampleBlock;
        const std::size_t end = std::min(n, begin + kSampleBlock);
        if (s.family == Family::pi_f) {
            std::gamma_distribution<double> gamma_draw(1.0 / p, 1.0);
            const double scale = p / (2.0 * s.c_plus);
            for (std::size_t i = begin; i < end; ++i) {
                const double g = gamma_draw(stream.engine());
                const double magnitude = std::pow(g * scale, 1.0 / p);
                out[i] = stream.uniform() < 0.5 ? -magnitude : magnitude;
            }
        } else {
            for (std::size_t i = begin; i < end; ++i) {
                for (;;) {
                    const double x = stream.normal();
                    const double c = x > 0.0 ? s.c_plus : s.c_minus;
                    if (stream.uniform() < std::exp(-c * std::pow(std::abs(x), p))) {
                        out[i] = x;
                        break;
                    }
                }
            }
        }
    });
    return out;
}

double pi_f_variance(double rho, double gamma) {
    const double p = gamma + 1.0;
    const double a = 2.0 * rho / p;
    return std::exp(std::lgamma(3.0 / p) - std::lgamma(1.0 / p)) / std::pow(a, 2.0 / p);
}

double log_abs_scale_function(const DriftSpec& drift, double x) {
    if (!drift.is_homogeneous()) throw PreconditionError("scale function needs a homogeneous drift");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    const double p = drift.gamma() + 1.0;
    const double cp = 2.0 / p * drift.f_plus();
    const double cm = -2.0 / p * drift.f_minus();
    auto g = [=](double y) {
        return 0.5 * y * y + (y > 0.0 ? cp : (y < 0.0 ? cm : 0.0)) * std::pow(std::abs(y), p);
    };
    const double a = std::min(0.0, x);
    const double b = std::max(0.0, x);
    double peak = std::max(g(a), g(b));
    for (int k = 1; k < 256; ++k) peak = std::max(peak, g(a + (b - a) * k / 256.0));
    auto f = [&](double y) { return std::exp(g(y) - peak); };
    // exp(g - peak) carries relative rounding noise of order |peak| * machine epsilon.
    const double tol = std::max(1e-12, 1e-13 * (1.0 + std::abs(peak)));
    double scaled = 0.0;
    const double width = (b - a) / 256.0;
    for (int k = 0; k < 256; ++k)
        scaled += integrate_adaptive(f, a + width * k, a + width * (k + 1), tol, kAbsTolPerWidth * width);
    return peak + std::log(scaled);
}

double scale_function(const DriftSpec& drift, double x) {
    if (x == 0.0) return 0.0;
    const double magnitude = std::exp(log_abs_scale_function(drift, x));
    return x > 0.0 ? magnitude : -magnitude;
}

}  // namespace klim
