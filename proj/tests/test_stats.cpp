#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "klim/error.hpp"
#include "klim/rng.hpp"
#include "klim/stats.hpp"

using namespace klim;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    Substream s(RngPolicy{seed}, StreamDomain::property_test, 0);
    std::vector<double> out(n);
    for (auto& x : out) x = scale * s.normal();
    return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// RK4 for g' = a'(t) + b(t) g^r on a fine grid: an independent solution of the equality case.
double rk4_equality(double r, double T, int n) {
    auto rhs = [r](double, double g) { return 1.0 + std::pow(std::max(g, 0.0), r); };  // a = 1 + t, b = 1
    double g = 1.0;
    const double h = T / n;
    for (int k = 0; k < n; ++k) {
        const double t = k * h;
        const double k1 = rhs(t, g);
        const double k2 = rhs(t + h / 2, g + h / 2 * k1);
        const double k3 = rhs(t + h / 2, g + h / 2 * k2);
        const double k4 = rhs(t + h, g + h * k3);
        g += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return g;
}

// Implicit trapezoid solution of the same equality; satisfies the discrete premise exactly.
std::vector<double> trapezoid_equality(std::span<const double> t, std::span<const double> a,
                                       std::span<const double> b, double r) {
    std::vector<double> g(t.size());
    g[0] = a[0];
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double h = 0.5 * (t[k + 1] - t[k]);
        const double known = g[k] + a[k + 1] - a[k] + h * b[k] * std::pow(g[k], r);
        double x = known;
        for (int it = 0; it < 200; ++it) x = known + h * b[k + 1] * std::pow(x, r);
        g[k + 1] = x;
    }
    return g;
}

}  // namespace

TEST_CASE("pairwise summation") {
    std::vector<double> v(1 << 20, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    CHECK(mean(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(sample_variance(std::vector<double>{1, 2, 3, 4}) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("KS statistic against hand-computed values") {
    const std::vector<double> xs{0.1, 0.4, 0.7};
    // Uniform CDF: max over i of (i/n - u_i, u_i - (i-1)/n).
    CHECK(ks_statistic(xs, [](double x) { return x; }) == doctest::Approx(0.3));
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{2.5, 3.5, 4.5, 5.5};
    // At x = 3: F_a = 1, F_b = 1/4.
    CHECK(ks_statistic(a, b) == doctest::Approx(0.75));
}

TEST_CASE("KS calibration and gross mismatch") {
    const auto z = normals(10000, 1);
    const auto ok = ks_one_sample(z, normal_cdf);
    CHECK(ok.pass);
    CHECK(ok.threshold == doctest::Approx(0.0163));
    const auto bad = ks_one_sample(z, [](double x) { return normal_cdf(x / 2.0); });
    CHECK_FALSE(bad.pass);
    CHECK_THROWS_AS(ks_one_sample(normals(50, 1), normal_cdf), PreconditionError);
    const auto two = ks_two_sample(z, normals(10000, 2), 0.01);
    CHECK(two.pass);
    CHECK(two.threshold == doctest::Approx(1.63 * std::sqrt(2e-4) + 0.01));
    CHECK(two.metadata["margin"] == 0.01);
}

TEST_CASE("KS is invariant under strictly monotone transforms") {
    const auto z = normals(2000, 3);
    std::vector<double> e(z.size());
    std::transform(z.begin(), z.end(), e.begin(), [](double x) { return std::exp(x); });
    const double direct = ks_statistic(z, normal_cdf);
    const double mapped = ks_statistic(e, [](double y) { return normal_cdf(std::log(y)); });
    CHECK(direct == mapped);
}

TEST_CASE("empirical moments") {
    const auto z = normals(100000, 4);
    CHECK(empirical_moment(z, 0.0).value == 1.0);
    const auto m2 = empirical_moment(z, 2.0);
    CHECK(std::abs(m2.value - 1.0) <= 3.0 * m2.std_error);
    const auto m1 = empirical_moment(z, 1.0);
    CHECK(std::abs(m1.value - std::sqrt(2.0 / std::numbers::pi)) <= 3.0 * m1.std_error);
}

TEST_CASE("covariance estimates") {
    const auto a = normals(5000, 5);
    const auto b = normals(5000, 6);
    CHECK(sample_covariance(a, a).value == doctest::Approx(sample_variance(a)).epsilon(1e-14));
    const auto ind = sample_covariance(a, b);
    CHECK(std::abs(ind.value) <= 3.0 * ind.std_error);
    // Jackknife error of a variance estimate for Gaussian data is close to sqrt(2/n).
    CHECK(sample_covariance(a, a).std_error == doctest::Approx(std::sqrt(2.0 / 5000)).epsilon(0.1));
    CHECK(sample_correlation(a, a) == doctest::Approx(1.0));
}

TEST_CASE("empirical_cov is symmetric and equals the variance on the diagonal") {
    RescaledEnsemble e;
    e.n_paths = 500;
    e.t = {1.0, 2.0};
    e.interpolated = {0, 0};
    const auto z = normals(2000, 7);
    e.v_scaled.assign(z.begin(), z.begin() + 1000);
    e.x_scaled.assign(z.begin() + 1000, z.end());
    e.valid.assign(1000, 1);
    CHECK(empirical_cov(e, 0, 1, Pair::vv).value == empirical_cov(e, 1, 0, Pair::vv).value);
    CHECK(empirical_cov(e, 0, 1, Pair::vx).value == empirical_cov(e, 1, 0, Pair::xv).value);
    CHECK(empirical_cov(e, 1, 1, Pair::xx).value == doctest::Approx(sample_variance(e.x_column(1))).epsilon(1e-14));
    e.valid.assign(1000, 0);
    CHECK_THROWS_AS(empirical_cov(e, 0, 1, Pair::vv), PreconditionError);
}

TEST_CASE("regression slope and Wilson interval") {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{1, 3, 5, 7};
    CHECK(ols_slope(x, y) == doctest::Approx(2.0));
    const auto none = wilson_interval(0, 100);
    CHECK(none.lower == 0.0);
    CHECK(none.upper > 0.0);
    const auto some = wilson_interval(1, 10000);
    CHECK(some.lower > 0.0);
    const auto half = wilson_interval(50, 100);
    CHECK(half.lower == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(half.upper == doctest::Approx(0.5962).epsilon(1e-3));
}

TEST_CASE("predicted moment exponents") {
    ModelSpec m;
    m.drift = DriftSpec::homogeneous(0, 0, 0);
    CHECK(predicted_moment_exponent(m, 2.0) == 1.0);
    m.drift = DriftSpec::homogeneous(1, -1, 1);
    m.beta = 1.0;
    CHECK(predicted_moment_exponent(m, 2.0) == 1.0);
    m.drift = DriftSpec::homogeneous(-1, 1, 0.5);
    m.beta = 0.0;
    CHECK(predicted_moment_exponent(m, 1.0) == doctest::Approx(2.0));
    m.beta = 0.8;  // beta >= (gamma+1)/2
    CHECK(predicted_moment_exponent(m, 1.0) == doctest::Approx(0.5));
    m.beta = 0.0;
    CHECK_THROWS_AS(predicted_moment_exponent(m, 2.0), PreconditionError);
    m.drift = DriftSpec::homogeneous(-1, 1, 2.0);
    CHECK_THROWS_AS(predicted_moment_exponent(m, 0.5), PreconditionError);
}

TEST_CASE("moment growth slopes on short runs") {
    ModelSpec m;
    m.drift = DriftSpec::homogeneous(0, 0, 0);
    m.t0 = 10.0;
    MomentGrowthOptions opts;
    opts.n_paths = 4000;
    opts.n_steps = 1000;
    const auto r = moment_growth_check(m, 2.0, 1e3, RngPolicy{8}, opts);
    CHECK(r.pass);
    CHECK(std::abs(r.statistic) <= 0.05);
    CHECK(r.metadata["predicted_exponent"] == 1.0);
    CHECK_THROWS_AS(moment_growth_check(m, 2.0, 50.0, RngPolicy{8}, opts), PreconditionError);
}

TEST_CASE("Gronwall bound: textbook cases") {
    std::vector<double> t(201);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.02 * static_cast<double>(k);
    const std::vector<double> ones(t.size(), 1.0);
    std::vector<double> linear(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) linear[k] = 1.0 + t[k];
    auto r0 = gronwall_check(t, ones, ones, 0.0, linear);
    CHECK(r0.pass);
    CHECK(r0.name == "gronwall_bound");
    const auto bound = gronwall_bound(t, ones, ones, 0.0);
    CHECK(bound.back() == doctest::Approx(2.0 * (1.0 + 4.0)));
    CHECK(gronwall_check(t, ones, ones, 0.5, std::vector<double>(t.size(), 0.0)).pass);
}

TEST_CASE("Gronwall: implicit trapezoid oracle agrees with RK4 and passes") {
    std::vector<double> t(4001);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 1e-3 * static_cast<double>(k);
    std::vector<double> a(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) a[k] = 1.0 + t[k];
    const std::vector<double> b(t.size(), 1.0);
    const auto g = trapezoid_equality(t, a, b, 0.5);
    CHECK(g.back() == doctest::Approx(rk4_equality(0.5, 4.0, 40000)).epsilon(1e-6));
    CHECK(gronwall_check(t, a, b, 0.5, g).pass);
}

TEST_CASE("Gronwall: violated premise is reported, not a bound failure") {
    std::vector<double> t{0.0, 1.0, 2.0};
    const std::vector<double> ones(3, 1.0);
    const std::vector<double> g{1.0, 100.0, 1.0};
    const auto r = gronwall_check(t, ones, ones, 0.5, g);
    CHECK_FALSE(r.pass);
    CHECK(r.name == "gronwall_premise");
    CHECK_THROWS_AS(gronwall_check(t, ones, ones, 1.0, g), PreconditionError);
}

TEST_CASE("Gronwall bound holds on randomized equality instances") {
    Substream rng(RngPolicy{31}, StreamDomain::property_test, 1);
    for (int instance = 0; instance < 100; ++instance) {
        const double r = 0.9 * rng.uniform();
        const double c1 = rng.uniform();
        const double c2 = 0.1 + rng.uniform();
        std::vector<double> t(301);
        std::vector<double> a(t.size());
        std::vector<double> b(t.size());
        const double mid = 0.05 + 2.0 * rng.uniform();
        for (std::size_t k = 0; k < t.size(); ++k) {
            t[k] = 0.01 * static_cast<double>(k);
            a[k] = c2 + c1 * t[k];
            b[k] = t[k] < 1.5 ? 0.1 + (mid - 0.1) * t[k] / 1.5 : mid;
        }
        const auto rep = gronwall_check(t, a, b, r, trapezoid_equality(t, a, b, r));
        CHECK(rep.pass);
        CHECK(rep.name == "gronwall_bound");
    }
}

TEST_CASE("report JSON") {
    const auto r = make_report("x", 0.5, 0.4, 10);
    CHECK_FALSE(r.pass);
    const auto j = to_json(r);
    CHECK(j.begin().key() == "name");
    CHECK(j["pass"] == false);
}
