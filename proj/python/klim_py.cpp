// Python bindings. Configurations and reports cross the boundary as JSON text;
// the package wrapper converts them to and from dicts.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <string>

#include "klim/config.hpp"
#include "klim/error.hpp"
#include "klim/integrate.hpp"
#include "klim/invariant.hpp"
#include "klim/model.hpp"
#include "klim/suites.hpp"
#include "klim/timechange.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

using Json = nlohmann::ordered_json;

klim::ModelSpec model_of(const std::string& text) { return klim::model_from_json(Json::parse(text)); }

py::array_t<double> to_array(std::span<const double> data) {
    py::array_t<double> out(static_cast<py::ssize_t>(data.size()));
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::array_t<double> matrix(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::dict simulate(const std::string& config_text, unsigned threads) {
    const auto c = klim::config_from_json(Json::parse(config_text));
    const auto grid = c.grid == klim::TimeGrid::Spacing::logarithmic
                          ? klim::TimeGrid::logarithmic(c.model.t0, c.horizon(), c.n_steps)
                          : klim::TimeGrid::uniform(c.model.t0, c.horizon(), c.n_steps);
    klim::SimOptions opts;
    opts.scheme = c.scheme;
    opts.explosion_threshold = c.explosion_threshold;
    opts.threads = threads;
    klim::PathBundle bundle = [&] {
        py::gil_scoped_release release;
        return klim::simulate_ske(c.model, grid, c.n_paths, klim::RngPolicy{c.seed}, opts);
    }();
    const auto times = bundle.grid.nodes();
    py::array_t<bool> exploded(bundle.n_paths);
    for (std::size_t i = 0; i < bundle.n_paths; ++i) exploded.mutable_at(i) = bundle.exploded[i] != 0;
    return py::dict("t"_a = to_array(times),
                    "v"_a = matrix(bundle.v, bundle.n_paths, bundle.n_times()),
                    "x"_a = matrix(bundle.x, bundle.n_paths, bundle.n_times()), "exploded"_a = exploded);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Kinetic SDE simulation and limit-theorem verification";

    // Translators run newest first, so the base class is registered first.
    const auto& error = py::register_exception<klim::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<klim::ExplosionError>(m, "ExplosionError", error.ptr());
    py::register_exception<klim::PreconditionError>(m, "PreconditionError", error.ptr());

    m.def("classify_regime", [](const std::string& model) {
        const auto r = klim::classify_regime(model_of(model));
        return py::make_tuple(std::string(klim::to_string(r.tag)), r.q);
    });
    m.def("explosion_verdict", [](const std::string& model) {
        return std::string(klim::to_string(klim::explosion_verdict(model_of(model))));
    });
    m.def("drift", [](const std::string& model, double v) { return model_of(model).drift(v); });

    m.def("default_config", [](const std::string& suite) {
        return klim::to_json(klim::default_config(klim::suite_from_string(suite))).dump();
    });
    m.def("normalize_config", [](const std::string& config) {
        return klim::to_json(klim::config_from_json(Json::parse(config))).dump();
    });
    m.def(
        "run_suite",
        [](const std::string& suite, const std::string& config, unsigned threads) {
            const auto kind = klim::suite_from_string(suite);
            const auto c = klim::config_from_json(Json::parse(config));
            py::gil_scoped_release release;
            return klim::to_json(klim::run_suite(kind, c, threads)).dump();
        },
        "suite"_a, "config"_a, "threads"_a = 0);
    m.def("simulate", &simulate, "config"_a, "threads"_a = 0);

    m.def(
        "sample_invariant",
        [](const std::string& family, const std::string& model, std::size_t n, std::uint64_t seed, unsigned threads) {
            const auto drift = model_of(model).drift;
            const auto law = family == "lambda" ? klim::DensitySpec::lambda_f(drift)
                             : family == "pi"   ? klim::DensitySpec::pi_f(drift.f_plus(), drift.gamma())
                                                : throw klim::ConfigError("family", "must be 'lambda' or 'pi'");
            std::vector<double> draws;
            {
                py::gil_scoped_release release;
                draws = law.sample(n, klim::RngPolicy{seed}, threads);
            }
            return to_array(draws);
        },
        "family"_a, "model"_a, "n"_a, "seed"_a, "threads"_a = 0);
    m.def("invariant_cdf", [](const std::string& family, const std::string& model, double x) {
        const auto drift = model_of(model).drift;
        return family == "lambda" ? klim::DensitySpec::lambda_f(drift).cdf(x)
                                  : klim::DensitySpec::pi_f(drift.f_plus(), drift.gamma()).cdf(x);
    });

    m.def("phi", [](double t0, double q, double s) { return klim::TimeChange::power(t0, q).phi(s); });
    m.def("phi_inverse", [](double t0, double q, double t) { return klim::TimeChange::power(t0, q).phi_inverse(t); });
    m.def("power_time_gap", &klim::power_time_gap, "q"_a, "s"_a, "t"_a, "eps"_a);
}
