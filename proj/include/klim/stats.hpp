#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "klim/integrate.hpp"
#include "klim/limits.hpp"
#include "klim/model.hpp"
#include "klim/rng.hpp"

namespace klim {

/// Outcome of one statistical check; pass is statistic <= threshold.
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    std::size_t n = 0;
    bool pass = false;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

TestReport make_report(std::string name, double statistic, double threshold, std::size_t n,
                       nlohmann::ordered_json metadata = nlohmann::ordered_json::object());
nlohmann::ordered_json to_json(const TestReport& report);

/// Sum by recursive halving; reassociation error grows like log n.
double pairwise_sum(std::span<const double> values);
double mean(std::span<const double> values);
/// Unbiased sample variance.
double sample_variance(std::span<const double> values);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Asymptotic alpha = 0.01 Kolmogorov critical constant.
inline constexpr double kKsCritical = 1.63;
inline constexpr std::size_t kMinKsSamples = 100;

/// sup_x |F_n(x) - F(x)| from the sorted-sample formula.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// sup_x |F_n(x) - G_m(x)| by merging the two sorted samples.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Threshold 1.63 / sqrt(n) + margin.
TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf,
                         double margin = 0.0, std::string name = "ks_one_sample");
/// Threshold 1.63 sqrt((n + m) / (n m)) + margin.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double margin = 0.0,
                         std::string name = "ks_two_sample");

/// Mean of |x|^kappa with its CLT standard error.
Estimate empirical_moment(std::span<const double> samples, double kappa);

/// Sample covariance of paired columns with a jackknife standard error.
Estimate sample_covariance(std::span<const double> a, std::span<const double> b);
double sample_correlation(std::span<const double> a, std::span<const double> b);

enum class Pair { vv, vx, xv, xx };

/// Covariance across paths valid at both times; throws PreconditionError below 100 valid paths.
Estimate empirical_cov(const RescaledEnsemble& ensemble, std::size_t s_index, std::size_t t_index, Pair pair);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Wilson score interval for k successes out of n at normal quantile z.
struct Interval {
    double lower;
    double upper;
};
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

/// Exponent of the moment bound E|V_t|^kappa <= C t^{exponent}; throws PreconditionError when
/// (kappa, gamma, beta, dissipativity) has no known growth exponent.
double predicted_moment_exponent(const ModelSpec& spec, double kappa);

struct MomentGrowthOptions {
    std::size_t n_paths = 10000;
    std::size_t n_steps = 4000;
    std::size_t n_record = 64;  ///< log-spaced recorded nodes
    double slope_margin = 0.05;
    SimOptions sim;
};

/// Simulates on a log-spaced grid [spec.t0, t_end] and regresses log E|V_t|^kappa on log t over
/// the top decade. statistic = slope - predicted exponent, threshold = slope_margin.
TestReport moment_growth_check(const ModelSpec& spec, double kappa, double t_end, const RngPolicy& rng,
                               const MomentGrowthOptions& options = {});

/// Gronwall-type bound check on a grid t_0 < ... < t_n.
///
/// Premise: g(t) <= a(t) + int_{t0}^t b g^r (trapezoid rule, tolerance 1e-8 relative).
/// Conclusion: g(t) <= 2^{1/(1-r)} [a(t) + ((1-r) int_{t0}^t b)^{1/(1-r)}] at every node.
/// A failed premise yields a failing report named "gronwall_premise" rather than a bound failure.
TestReport gronwall_check(std::span<const double> t, std::span<const double> a, std::span<const double> b,
                          double r, std::span<const double> g);

/// Right-hand side of the Gronwall-type conclusion at each node.
std::vector<double> gronwall_bound(std::span<const double> t, std::span<const double> a,
                                   std::span<const double> b, double r);

}  // namespace klim
