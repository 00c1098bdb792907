#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "klim/integrate.hpp"
#include "klim/model.hpp"
#include "klim/time_grid.hpp"

namespace klim {

enum class OutputFormat { csv, json };

/// Everything a reproducible experiment needs. Worker-thread count is deliberately
/// not part of it: results never depend on it.
struct ExperimentConfig {
    ModelSpec model;
    double epsilon = 1e-2;
    std::size_t n_paths = 10000;
    std::size_t n_steps = 1000;
    std::uint64_t seed = 20261019;
    std::vector<double> t_eval{1.0};
    OutputFormat output = OutputFormat::json;
    TimeGrid::Spacing grid = TimeGrid::Spacing::uniform;
    /// Overrides every additive KS discretization margin of a suite when set.
    std::optional<double> threshold_margin;
    /// Simulation horizon for `simulate`; defaults to max(t_eval) / epsilon.
    std::optional<double> t_end;
    Scheme scheme = Scheme::automatic;
    double explosion_threshold = kDefaultExplosionThreshold;

    double horizon() const;
    void validate() const;
};

nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; wrong types or values throw ConfigError naming the key
/// (model keys are reported as "model.<key>").
ExperimentConfig config_from_json(const nlohmann::ordered_json& doc);

}  // namespace klim
