#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "klim/config.hpp"
#include "klim/error.hpp"
#include "klim/stats.hpp"

namespace klim {

enum class SuiteKind { supercritical, critical, subcritical, moments, gronwall, invariant, timechange, explosion };

std::string_view to_string(SuiteKind kind) noexcept;
/// Throws ConfigError("suite", ...) for unknown names.
SuiteKind suite_from_string(std::string_view name);
const std::vector<SuiteKind>& all_suites();

/// The configured model does not belong to the regime a suite verifies.
class RegimeMismatchError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Acceptance-scale defaults of each suite.
///
/// supercritical, critical, subcritical and explosion read the model from the config;
/// moments, gronwall, invariant and timechange run fixed model families and only take
/// paths, steps, seed, t_eval and the margin override from it.
ExperimentConfig default_config(SuiteKind kind);

struct SuiteReport {
    std::string suite;
    std::string regime;
    nlohmann::ordered_json parameters;
    double epsilon = 0.0;
    std::vector<TestReport> tests;

    bool pass() const noexcept;
};

/// {suite, regime, parameters, epsilon, tests: [...]} in that key order.
nlohmann::ordered_json to_json(const SuiteReport& report);
/// One row per test: suite,name,statistic,threshold,n,pass (LF line endings).
void write_summary_csv(const SuiteReport& report, std::ostream& out);

/// Runs a suite. `threads` only sets the worker count; reports never depend on it.
/// Throws RegimeMismatchError (message cites q) when the model is in the wrong regime.
SuiteReport run_suite(SuiteKind kind, const ExperimentConfig& config, unsigned threads = 0);

/// Explosion frequency of the configured model over [t0, horizon()] with the explicit Euler
/// scheme. Asserts a positive Wilson lower bound when explosion is possible, a zero fraction
/// when the model is almost surely global, and only reports the fraction otherwise.
TestReport explosion_probability(const ExperimentConfig& config, unsigned threads = 0,
                                 std::string name = "explosion_fraction");

/// Uniform-ish grid on [start, points.back()] with at most (end - start) / n_steps spacing that
/// contains every value of the sorted `points` as a node.
TimeGrid grid_through(double start, std::span<const double> points, std::size_t n_steps);

}  // namespace klim
