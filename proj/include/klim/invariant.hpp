#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "klim/model.hpp"
#include "klim/rng.hpp"

namespace klim {

/// One-dimensional law given by an unnormalized log-density on the real line.
///
/// The normalization constant and a CDF table are computed on first use
/// (once, thread-safe) by adaptive Gauss-Kronrod quadrature over the region
/// where the log-density is within 60 of its peak. Copies share that state.
class DensitySpec {
public:
    enum class Family { lambda_f, pi_f, generic };

    /// Invariant law of dH = dW - H/2 ds - F(H) ds:
    /// log-density -x^2/2 - (2/(gamma+1)) sgn(x) F(sgn x) |x|^{gamma+1}.
    static DensitySpec lambda_f(const DriftSpec& drift);
    /// Invariant law of dH = dW - rho sgn(H)|H|^gamma ds: log-density -(2 rho/(gamma+1)) |x|^{gamma+1}.
    static DensitySpec pi_f(double rho, double gamma);
    /// Arbitrary log-density; `mode` seeds the peak search. No sampler.
    static DensitySpec from_log_density(std::function<double(double)> log_density, std::string name,
                                        double mode = 0.0);

    Family family() const noexcept;
    const std::string& name() const noexcept;
    double log_unnormalized(double x) const;

    /// Z = integral of exp(log_unnormalized), relative error <= 1e-10.
    double normalization() const;
    double pdf(double x) const;
    double cdf(double x) const;
    /// Inverse CDF by bisection to 1e-10 in x.
    double quantile(double p) const;
    /// Raw moment E[X^k] by quadrature.
    double moment(int k) const;
    double variance() const;
    /// Truncated support [lo, hi] used by the quadrature.
    std::pair<double, double> support() const;

    /// n independent draws. Lambda_F uses rejection from the standard normal
    /// (dissipative drifts only); Pi_F is sampled exactly through a Gamma variable.
    /// Throws UnsupportedError otherwise. Output depends only on (n, master_seed).
    std::vector<double> sample(std::size_t n, const RngPolicy& rng, unsigned threads = 0) const;

    struct State;

private:
    explicit DensitySpec(std::shared_ptr<State> state) : state_(std::move(state)) {}
    const State& ready() const;

    std::shared_ptr<State> state_;
};

/// Variance of Pi_F in closed form: Gamma(3/p) / (Gamma(1/p) a^{2/p}), p = gamma + 1, a = 2 rho / p.
double pi_f_variance(double rho, double gamma);

/// Log of |p(x)| for the scale function p(x) = int_0^x exp(y^2/2 + (2/(gamma+1)) sgn(y)F(sgn y)|y|^{gamma+1}) dy.
/// Returns -inf at x = 0.
double log_abs_scale_function(const DriftSpec& drift, double x);
/// p(x) itself; overflows to +-inf for very large |x| (use log_abs_scale_function there).
double scale_function(const DriftSpec& drift, double x);

/// Normalization constant (alias kept for the operation name used in reports).
inline double normalize(const DensitySpec& d) { return d.normalization(); }

}  // namespace klim
