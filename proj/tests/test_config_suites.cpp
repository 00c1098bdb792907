#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "klim/config.hpp"
#include "klim/error.hpp"
#include "klim/suites.hpp"

using namespace klim;

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    out.push_back(cell);
    return out;
}

}  // namespace

TEST_CASE("experiment config round-trips through JSON") {
    ExperimentConfig c;
    c.model.drift = DriftSpec::homogeneous(0.5, -2.0, 1.5);
    c.model.beta = 0.3;
    c.model.t0 = 2.0;
    c.epsilon = 0.125;
    c.n_paths = 77;
    c.n_steps = 12345;
    c.seed = 0xfedcba9876543210ULL;
    c.t_eval = {0.5, 1.0 / 3.0};
    c.output = OutputFormat::csv;
    c.grid = TimeGrid::Spacing::logarithmic;
    c.threshold_margin = 0.0123;
    c.t_end = 99.5;
    c.scheme = Scheme::tamed_euler;
    const auto doc = to_json(c);
    const auto back = config_from_json(nlohmann::ordered_json::parse(doc.dump()));
    CHECK(to_json(back) == doc);
    CHECK(back.seed == c.seed);
    CHECK(back.t_eval[1] == c.t_eval[1]);
    CHECK(*back.threshold_margin == 0.0123);
    CHECK(config_from_json(to_json(ExperimentConfig{})).t_end == std::nullopt);
}

TEST_CASE("config validation names the field") {
    auto expect_field = [](nlohmann::ordered_json doc, const std::string& field) {
        try {
            config_from_json(doc);
            FAIL("expected ConfigError for " << field);
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    expect_field({{"model", {{"beta", "two"}}}}, "model.beta");
    expect_field({{"epsilon", 0.0}}, "epsilon");
    expect_field({{"n_paths", -3}}, "n_paths");
    expect_field({{"t_eval", {1.0, "x"}}}, "t_eval");
    expect_field({{"grid", "cubic"}}, "grid");
    expect_field({{"scheme", "rk4"}}, "scheme");
    expect_field({{"model", {{"t0", -1.0}}}}, "model.t0");
}

TEST_CASE("suite names and defaults") {
    for (SuiteKind k : all_suites()) {
        CHECK(suite_from_string(to_string(k)) == k);
        CHECK_NOTHROW(default_config(k).validate());
    }
    CHECK_THROWS_AS(suite_from_string("bogus"), ConfigError);
    CHECK(classify_regime(default_config(SuiteKind::supercritical).model).tag == RegimeTag::super_critical);
    CHECK(classify_regime(default_config(SuiteKind::critical).model).tag == RegimeTag::critical);
    CHECK(classify_regime(default_config(SuiteKind::subcritical).model).tag == RegimeTag::sub_critical);
}

TEST_CASE("regime mismatch cites q") {
    auto c = default_config(SuiteKind::critical);
    c.model.beta = 2.0;
    try {
        run_suite(SuiteKind::critical, c);
        FAIL("expected RegimeMismatchError");
    } catch (const RegimeMismatchError& e) {
        CHECK(std::string(e.what()).find("q = 1") != std::string::npos);
    }
    CHECK_THROWS_AS(run_suite(SuiteKind::subcritical, default_config(SuiteKind::supercritical)), RegimeMismatchError);
}

TEST_CASE("grid_through hits every point") {
    const std::vector<double> points{std::log(100.0), std::log(400.0)};
    const auto g = grid_through(0.0, points, 6000);
    CHECK(g.find_node(points[0]).has_value());
    CHECK(g.t_end() == points[1]);
    for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] - g[k - 1] <= points[1] / 6000 * (1 + 1e-9));
}

TEST_CASE("report layout and CSV/JSON agreement") {
    const auto report = run_suite(SuiteKind::gronwall, default_config(SuiteKind::gronwall));
    CHECK(report.pass());
    const auto j = to_json(report);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"suite", "regime", "parameters", "epsilon", "tests"});

    std::ostringstream csv;
    write_summary_csv(report, csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "suite,name,statistic,threshold,n,pass");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        const auto cells = split(line);
        REQUIRE(cells.size() == 6);
        const auto& t = j["tests"][row++];
        CHECK(cells[1] == t["name"].get<std::string>());
        CHECK(std::stod(cells[2]) == t["statistic"].get<double>());
        CHECK(std::stod(cells[3]) == t["threshold"].get<double>());
        CHECK(std::stoul(cells[4]) == t["n"].get<std::size_t>());
        CHECK((cells[5] == "true") == t["pass"].get<bool>());
    }
    CHECK(row == report.tests.size());
}

TEST_CASE("suite reports do not depend on the worker count") {
    auto c = default_config(SuiteKind::timechange);
    c.n_paths = 500;
    c.n_steps = 300;
    const auto one = to_json(run_suite(SuiteKind::timechange, c, 1)).dump();
    const auto four = to_json(run_suite(SuiteKind::timechange, c, 4)).dump();
    CHECK(one == four);
}

TEST_CASE("explosion probability assertions follow the verdict") {
    auto c = default_config(SuiteKind::explosion);
    c.n_paths = 200;
    c.n_steps = 2000;
    const auto explosive = explosion_probability(c);
    CHECK(explosive.pass);
    CHECK(explosive.metadata["fraction"].get<double>() > 0.0);
    c.model.drift = DriftSpec::homogeneous(0, 0, 0);
    const auto free = explosion_probability(c);
    CHECK(free.pass);
    CHECK(free.statistic == 0.0);
    CHECK(free.metadata["verdict"] == "almost_surely_global");
}
