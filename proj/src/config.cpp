#include "klim/config.hpp"

#include <algorithm>
#include <cmath>

#include "klim/error.hpp"

namespace klim {

double ExperimentConfig::horizon() const {
    if (t_end) return *t_end;
    return *std::max_element(t_eval.begin(), t_eval.end()) / epsilon;
}

void ExperimentConfig::validate() const {
    model.validate();
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon", "must lie in (0, 1]");
    if (n_paths == 0) throw ConfigError("n_paths", "must be positive");
    if (n_steps == 0) throw ConfigError("n_steps", "must be positive");
    if (t_eval.empty()) throw ConfigError("t_eval", "needs at least one time");
    for (double t : t_eval)
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("t_eval", "times must be finite and > 0");
    if (threshold_margin && !(*threshold_margin >= 0.0)) throw ConfigError("threshold_margin", "must be >= 0");
    if (t_end && !(*t_end > model.t0)) throw ConfigError("t_end", "must exceed t0");
    if (!(explosion_threshold > 0.0)) throw ConfigError("explosion_threshold", "must be positive");
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["model"] = to_json(c.model);
    j["epsilon"] = c.epsilon;
    j["n_paths"] = c.n_paths;
    j["n_steps"] = c.n_steps;
    j["seed"] = c.seed;
    j["t_eval"] = c.t_eval;
    j["output"] = c.output == OutputFormat::csv ? "csv" : "json";
    j["grid"] = c.grid == TimeGrid::Spacing::logarithmic ? "log" : "uniform";
    j["threshold_margin"] = c.threshold_margin ? nlohmann::ordered_json(*c.threshold_margin) : nullptr;
    j["t_end"] = c.t_end ? nlohmann::ordered_json(*c.t_end) : nullptr;
    j["scheme"] = to_string(c.scheme);
    j["explosion_threshold"] = c.explosion_threshold;
    return j;
}

namespace {

const nlohmann::ordered_json* find(const nlohmann::ordered_json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return nullptr;
    return &*it;
}

double number(const nlohmann::ordered_json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(key, "expected a number, got " + std::string(v.type_name()));
    return v.get<double>();
}

std::uint64_t count(const nlohmann::ordered_json& v, const char* key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string text(const nlohmann::ordered_json& v, const char* key) {
    if (!v.is_string()) throw ConfigError(key, "expected a string, got " + std::string(v.type_name()));
    return v.get<std::string>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
    ExperimentConfig c;
    if (const auto* m = find(doc, "model")) {
        try {
            c.model = model_from_json(*m);
        } catch (const ConfigError& e) {
            throw ConfigError("model." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
        }
    }
    if (const auto* v = find(doc, "epsilon")) c.epsilon = number(*v, "epsilon");
    if (const auto* v = find(doc, "n_paths")) c.n_paths = count(*v, "n_paths");
    if (const auto* v = find(doc, "n_steps")) c.n_steps = count(*v, "n_steps");
    if (const auto* v = find(doc, "seed")) c.seed = count(*v, "seed");
    if (const auto* v = find(doc, "t_eval")) {
        if (!v->is_array()) throw ConfigError("t_eval", "expected an array of numbers");
        c.t_eval.clear();
        for (const auto& t : *v) c.t_eval.push_back(number(t, "t_eval"));
    }
    if (const auto* v = find(doc, "output")) {
        const auto s = text(*v, "output");
        if (s == "csv")
            c.output = OutputFormat::csv;
        else if (s == "json")
            c.output = OutputFormat::json;
        else
            throw ConfigError("output", "expected 'csv' or 'json'");
    }
    if (const auto* v = find(doc, "grid")) {
        const auto s = text(*v, "grid");
        if (s == "uniform")
            c.grid = TimeGrid::Spacing::uniform;
        else if (s == "log")
            c.grid = TimeGrid::Spacing::logarithmic;
        else
            throw ConfigError("grid", "expected 'uniform' or 'log'");
    }
    if (const auto* v = find(doc, "threshold_margin")) c.threshold_margin = number(*v, "threshold_margin");
    if (const auto* v = find(doc, "t_end")) c.t_end = number(*v, "t_end");
    if (const auto* v = find(doc, "scheme")) {
        try {
            c.scheme = scheme_from_string(text(*v, "scheme"));
        } catch (const ConfigError&) {
            throw;
        } catch (const PreconditionError& e) {
            throw ConfigError("scheme", e.what());
        }
    }
    if (const auto* v = find(doc, "explosion_threshold")) c.explosion_threshold = number(*v, "explosion_threshold");
    c.validate();
    return c;
}

}  // namespace klim
