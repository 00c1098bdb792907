#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "klim/error.hpp"
#include "klim/integrate.hpp"
#include "klim/timechange.hpp"

using namespace klim;

namespace {

PathBundle filled(const TimeGrid& grid, double (*f)(double)) {
    PathBundle b(grid, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        b.v_at(0, k) = f(grid[k]);
        b.x_at(0, k) = 2.0 * f(grid[k]);
    }
    return b;
}

}  // namespace

TEST_CASE("closed-form values") {
    CHECK(TimeChange::power(1.0, 0.0).phi(2.0) == doctest::Approx(3.0));
    CHECK(TimeChange::power(1.0, 0.25).phi(2.0) == doctest::Approx(4.0));
    CHECK(TimeChange::power(2.0, 1.0).t1() == doctest::Approx(0.5));
    CHECK(TimeChange::exponential(2.0).phi(1.0) == doctest::Approx(2.0 * std::exp(1.0)));
    CHECK(TimeChange::power(1.0, 0.5).kind() == TimeChange::Kind::exponential);
    CHECK(std::isinf(TimeChange::power(1.0, 0.25).t1()));
}

TEST_CASE("phi' = phi^{2q} against a central-difference oracle") {
    for (const auto& tc : {TimeChange::exponential(1.5), TimeChange::power(1.0, 0.25), TimeChange::power(0.7, 0.0),
                           TimeChange::power(2.0, 1.0), TimeChange::power(1.0, 0.9)}) {
        const double end = std::isfinite(tc.t1()) ? 0.9 * tc.t1() : 5.0;
        for (int i = 0; i <= 200; ++i) {
            const double s = end * i / 200.0;
            const double p2q = std::pow(tc.phi(s), 2.0 * tc.q());
            CHECK(std::abs(tc.phi_prime(s) - p2q) <= 1e-10 * (1.0 + p2q));
            const double h = 1e-5 * std::max(1e-3, end);
            if (s > h && s + h < end) {
                const double fd = (tc.phi(s + h) - tc.phi(s - h)) / (2.0 * h);
                CHECK(fd == doctest::Approx(tc.phi_prime(s)).epsilon(1e-6));
                const double fd2 = (tc.phi_prime(s + h) - tc.phi_prime(s - h)) / (2.0 * h);
                CHECK(fd2 == doctest::Approx(tc.phi_second(s)).epsilon(1e-5));
            }
            CHECK(std::abs(tc.phi_inverse(tc.phi(s)) - s) <= 1e-12 * std::max(1.0, s));
        }
    }
}

TEST_CASE("domain errors name t1") {
    const auto tc = TimeChange::power(2.0, 1.0);
    try {
        tc.phi(0.6);
        FAIL("expected RangeError");
    } catch (const RangeError& e) {
        CHECK(std::string(e.what()).find("t1") != std::string::npos);
    }
    CHECK_THROWS_AS(tc.phi(-0.1), RangeError);
    CHECK_THROWS_AS(tc.phi_inverse(1.0), RangeError);
}

TEST_CASE("gap formula matches differences of phi^{-1} and diverges") {
    for (double q : {0.0, 0.25, 0.4}) {
        const auto tc = TimeChange::power(1.0, q);
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            const double s = 1.0;
            const double t = 2.0;
            const double direct = tc.phi_inverse(t / eps) - tc.phi_inverse(s / eps);
            CHECK(power_time_gap(q, s, t, eps) == doctest::Approx(direct).epsilon(1e-9));
        }
        CHECK(power_time_gap(q, 1.0, 2.0, 1e-6) > power_time_gap(q, 1.0, 2.0, 1e-3));
    }
}

TEST_CASE("scaling of deterministic paths") {
    const auto tc = TimeChange::exponential(1.0);
    const auto t_grid = TimeGrid::logarithmic(1.0, std::exp(3.0), 300);
    const auto s_grid = pullback_grid(tc, t_grid);
    const auto constant = filled(t_grid, [](double) { return 2.0; });
    const auto c_out = apply_scaling(constant, tc, s_grid);
    for (std::size_t k = 0; k < s_grid.size(); ++k)
        CHECK(c_out.v_at(0, k) == doctest::Approx(2.0 * std::exp(-s_grid[k] / 2.0)).epsilon(1e-13));
    const auto back = inverse_scaling(c_out, tc, t_grid);
    for (std::size_t k = 0; k < t_grid.size(); ++k) CHECK(back.v_at(0, k) == doctest::Approx(2.0).epsilon(1e-13));

    const auto root = filled(t_grid, [](double t) { return std::sqrt(t); });
    const auto r_out = apply_scaling(root, tc, s_grid);
    for (std::size_t k = 0; k < s_grid.size(); ++k) CHECK(r_out.v_at(0, k) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("off-node scaling interpolates linearly and checks its window") {
    const auto tc = TimeChange::power(1.0, 0.0);  // phi(s) = 1 + s
    const auto t_grid = TimeGrid::uniform(1.0, 3.0, 2);
    const auto line = filled(t_grid, [](double t) { return 3.0 * t; });
    const auto out = apply_scaling(line, tc, TimeGrid::from_nodes({0.0, 0.5, 2.0}));
    CHECK(out.v_at(0, 1) == doctest::Approx(4.5));
    CHECK_THROWS_AS(apply_scaling(line, tc, TimeGrid::from_nodes({0.0, 2.5})), RangeError);
}

TEST_CASE("round trip on aligned grids of simulated paths") {
    ModelSpec m;
    m.drift = DriftSpec::power_law(1.0, 1.0);
    m.beta = 0.5;
    const auto tc = TimeChange::power(1.0, m.q());
    const auto s_grid = TimeGrid::uniform(0.0, 3.0, 300);
    const auto t_grid = pushforward_grid(tc, s_grid);
    const auto v = simulate_ske(m, t_grid, 50, RngPolicy{8});
    const auto back = inverse_scaling(apply_scaling(v, tc, s_grid), tc, t_grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < v.v.size(); ++i)
        worst = std::max(worst, std::abs(back.v[i] - v.v[i]) / std::max(1.0, std::abs(v.v[i])));
    CHECK(worst <= 1e-12);
}

TEST_CASE("explosion flags survive the change of time") {
    PathBundle b(TimeGrid::uniform(1.0, 5.0, 4), 1);
    for (std::size_t k = 0; k < 5; ++k) b.v_at(0, k) = 1.0;
    b.exploded[0] = 1;
    b.explosion_index[0] = 3;
    b.v_at(0, 3) = b.v_at(0, 4) = std::numeric_limits<double>::quiet_NaN();
    const auto tc = TimeChange::power(1.0, 0.0);
    const auto out = apply_scaling(b, tc, TimeGrid::from_nodes({0.0, 1.0, 2.0, 2.5, 4.0}));
    CHECK(out.exploded[0] == 1);
    CHECK(out.explosion_index[0] == 3);
    CHECK(out.valid(0, 2));
    CHECK_FALSE(out.valid(0, 3));
}
