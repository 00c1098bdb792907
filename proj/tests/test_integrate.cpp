#include <cmath>
#include <vector>

#include "doctest.h"
#include "klim/error.hpp"
#include "klim/integrate.hpp"
#include "klim/stats.hpp"

using namespace klim;

namespace {

ModelSpec model(DriftSpec drift, double beta, double t0 = 1.0, double v0 = 1.0) {
    ModelSpec m;
    m.drift = std::move(drift);
    m.beta = beta;
    m.t0 = t0;
    m.v0 = v0;
    return m;
}

// |estimate - expected| within k standard errors of the sample mean / variance.
void check_mean(std::span<const double> xs, double expected, double k = 4.0) {
    const double se = std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
    CHECK(std::abs(mean(xs) - expected) <= k * se);
}

void check_variance(std::span<const double> xs, double expected, double k = 4.0) {
    // Gaussian-case standard error of the sample variance.
    const double se = expected * std::sqrt(2.0 / static_cast<double>(xs.size() - 1));
    CHECK(std::abs(sample_variance(xs) - expected) <= k * se);
}

}  // namespace

TEST_CASE("zero drift gives Brownian velocity") {
    const auto m = model(DriftSpec::homogeneous(0, 0, 0), 0.0, 1.0, 1.0);
    SimOptions opts;
    opts.record = {200};
    const auto b = simulate_ske(m, TimeGrid::uniform(1.0, 3.0, 200), 20000, RngPolicy{11}, opts);
    CHECK(b.n_times() == 2);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(b.v_at(i, 0) == 1.0);
        CHECK(b.x_at(i, 0) == 0.0);
    }
    check_mean(b.v_column(1), 1.0);
    check_variance(b.v_column(1), 2.0);
}

TEST_CASE("zero drift position variance matches the iterated-integral oracle") {
    // X_T - x0 = int_{t0}^T (v0 + B_{u-t0}) du; its variance is int int min(u-t0, r-t0) du dr.
    const double t0 = 0.5;
    const double T = 2.5;
    const int n = 400;
    double oracle = 0.0;
    const double h = (T - t0) / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) oracle += std::min((i + 0.5) * h, (j + 0.5) * h) * h * h;
    const auto m = model(DriftSpec::homogeneous(0, 0, 0), 0.0, t0, 1.0);
    SimOptions opts;
    opts.record = {1000};
    const auto b = simulate_ske(m, TimeGrid::uniform(t0, T, 1000), 20000, RngPolicy{12}, opts);
    check_mean(b.x_column(1), (T - t0) * 1.0);
    check_variance(b.x_column(1), oracle);
}

TEST_CASE("linear drift with beta = 0 relaxes to variance 1/2") {
    const auto m = model(DriftSpec::homogeneous(1, -1, 1), 0.0);
    SimOptions opts;
    opts.record = {4000};
    const auto b = simulate_ske(m, TimeGrid::uniform(1.0, 21.0, 4000), 20000, RngPolicy{13}, opts);
    // Exact OU: mean e^{-20}, variance (1 - e^{-40}) / 2.
    check_mean(b.v_column(1), std::exp(-20.0));
    check_variance(b.v_column(1), 0.5);
}

TEST_CASE("tamed and plain Euler agree with exact OU transitions on the linear drift") {
    ModelSpec m = model(DriftSpec::homogeneous(1.5, -1.5, 1), 0.0);
    const auto grid = TimeGrid::uniform(0.0, 1.0, 1000);
    SimOptions opts;
    opts.record = {1000};
    const auto exact = simulate_ou_exact(1.5, 1.0, grid, 10000, RngPolicy{14}, 1.0, opts);
    const double mean_exact = std::exp(-1.5);
    const double var_exact = (1.0 - std::exp(-3.0)) / 3.0;
    check_mean(exact.v_column(1), mean_exact, 3.0);
    check_variance(exact.v_column(1), var_exact, 3.0);

    for (Scheme scheme : {Scheme::euler, Scheme::tamed_euler}) {
        m.t0 = 1.0;
        SimOptions o = opts;
        o.scheme = scheme;
        const auto b = simulate_ske(m, TimeGrid::uniform(1.0, 2.0, 1000), 10000, RngPolicy{15}, o);
        check_mean(b.v_column(1), mean_exact, 3.0);
        check_variance(b.v_column(1), var_exact, 3.0);
    }
}

TEST_CASE("exact OU one-step mean") {
    const auto grid = TimeGrid::uniform(0.0, 0.3, 1);
    const auto b = simulate_ou_exact(1.0, 1.0, grid, 40000, RngPolicy{16}, 1.0);
    check_mean(b.v_column(1), std::exp(-0.3));
    CHECK_THROWS_AS(simulate_ou_exact(0.0, 1.0, grid, 10, RngPolicy{1}, 1.0), PreconditionError);
}

TEST_CASE("homogenized equations reach their stationary variances") {
    SimOptions opts;
    opts.record = {3000};
    const auto s_grid = TimeGrid::uniform(0.0, 15.0, 3000);
    {
        const auto zero = model(DriftSpec::homogeneous(0, 0, 0), 0.5);
        const auto b = simulate_exponential_homogenized(zero, s_grid, 10000, RngPolicy{17}, 0.0, opts);
        check_variance(b.v_column(1), 1.0, 5.0);
    }
    {
        const auto lin = model(DriftSpec::homogeneous(1, -1, 1), 1.0);
        const auto b = simulate_exponential_homogenized(lin, s_grid, 10000, RngPolicy{18}, 0.0, opts);
        check_variance(b.v_column(1), 1.0 / 3.0, 5.0);
    }
    for (double rho : {1.0, 2.0}) {
        const auto b = simulate_power_homogenized(DriftSpec::power_law(rho, 1.0), s_grid, 10000, RngPolicy{19}, 0.0,
                                                  opts);
        check_variance(b.v_column(1), 1.0 / (2.0 * rho), 5.0);
    }
    CHECK_THROWS_AS(simulate_power_homogenized(DriftSpec::homogeneous(0, 0, 1), s_grid, 10, RngPolicy{1}, 0.0),
                    PreconditionError);
    CHECK_THROWS_AS(simulate_exponential_homogenized(model(DriftSpec::homogeneous(1, -1, 1), 2.0), s_grid, 10,
                                                     RngPolicy{1}, 0.0),
                    PreconditionError);
}

TEST_CASE("grid must start at t0") {
    const auto m = model(DriftSpec::homogeneous(0, 0, 0), 0.0, 2.0);
    CHECK_THROWS_AS(simulate_ske(m, TimeGrid::uniform(1.0, 3.0, 10), 10, RngPolicy{1}), PreconditionError);
}

TEST_CASE("results do not depend on the worker count") {
    const auto m = model(DriftSpec::homogeneous(1, -1, 3), 0.5);
    const auto grid = TimeGrid::uniform(1.0, 5.0, 500);
    SimOptions one;
    one.threads = 1;
    SimOptions many;
    many.threads = 5;
    const auto a = simulate_ske(m, grid, 333, RngPolicy{99}, one);
    const auto b = simulate_ske(m, grid, 333, RngPolicy{99}, many);
    CHECK(a.v == b.v);
    CHECK(a.x == b.x);
}

TEST_CASE("recording a subset reproduces the full run at those nodes") {
    const auto m = model(DriftSpec::homogeneous(1, -1, 1), 1.0);
    const auto grid = TimeGrid::uniform(1.0, 5.0, 100);
    const auto full = simulate_ske(m, grid, 50, RngPolicy{5});
    SimOptions opts;
    opts.record = {30, 70};
    const auto part = simulate_ske(m, grid, 50, RngPolicy{5}, opts);
    REQUIRE(part.n_times() == 3);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(part.v_at(i, 1) == full.v_at(i, 30));
        CHECK(part.x_at(i, 2) == full.x_at(i, 70));
    }
}

TEST_CASE("per-path initial values") {
    const auto m = model(DriftSpec::homogeneous(0, 0, 0), 0.5);
    const std::vector<double> h0{-1.0, 0.0, 2.0};
    const auto b = simulate_exponential_homogenized(m, TimeGrid::uniform(0.0, 1.0, 10), 3, RngPolicy{1}, h0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(b.v_at(i, 0) == h0[i]);
}

TEST_CASE("explosions are flagged and NaN-filled") {
    // Superlinear push away from 0 on the positive side only: some paths escape, others wander below 0.
    const auto m = model(DriftSpec::homogeneous(-1, 0, 3), 0.0, 1.0, 0.2);
    SimOptions opts;
    opts.scheme = Scheme::euler;
    const auto grid = TimeGrid::uniform(1.0, 3.0, 20000);
    std::size_t exploded_low = 0;
    std::size_t exploded_high = 0;
    for (double threshold : {1e4, 1e6}) {
        opts.explosion_threshold = threshold;
        const auto b = simulate_ske(m, grid, 200, RngPolicy{3}, opts);
        (threshold == 1e4 ? exploded_low : exploded_high) = b.exploded_count();
        for (std::size_t i = 0; i < b.n_paths; ++i) {
            if (!b.exploded[i]) continue;
            const auto k = static_cast<std::size_t>(b.explosion_index[i]);
            CHECK(std::isnan(b.v_at(i, k)));
            CHECK(std::isfinite(b.v_at(i, k - 1)));
            CHECK(std::abs(b.v_at(i, k - 1)) <= threshold);
            CHECK(b.explosion_time[i] >= grid[k - 1]);
        }
    }
    // Raising the threshold never increases the exploded count.
    CHECK(exploded_high <= exploded_low);
    CHECK(exploded_low > 0);
}

TEST_CASE("all paths exploding is an error carrying the fraction") {
    const auto m = model(DriftSpec::homogeneous(-1, -1, 3), 1.0, 1.0, 5.0);
    SimOptions opts;
    opts.scheme = Scheme::euler;
    try {
        simulate_ske(m, TimeGrid::uniform(1.0, 2.0, 10000), 20, RngPolicy{4}, opts);
        FAIL("expected ExplosionError");
    } catch (const ExplosionError& e) {
        CHECK(e.exploded_fraction() == 1.0);
    }
}

TEST_CASE("scheme names") {
    CHECK(scheme_from_string("tamed_euler") == Scheme::tamed_euler);
    CHECK(to_string(Scheme::euler) == "euler");
    CHECK_THROWS_AS(scheme_from_string("milstein"), PreconditionError);
}
