// klim: simulate the kinetic SDE and run the verification suites.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "klim/config.hpp"
#include "klim/error.hpp"
#include "klim/integrate.hpp"
#include "klim/invariant.hpp"
#include "klim/parallel.hpp"
#include "klim/path_bundle.hpp"
#include "klim/suites.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kRuntime = 3 };

struct Flags {
    std::optional<double> gamma, beta, rho, f_plus, f_minus, t0, v0, x0, eps, t_end, margin;
    std::optional<std::size_t> paths, steps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> grid, out;
    std::vector<double> t_eval;
    std::string config_file;
    std::string output_file;
    unsigned threads = 0;
};

void add_common(CLI::App& cmd, Flags& f) {
    cmd.add_option("--gamma", f.gamma, "drift homogeneity exponent");
    cmd.add_option("--beta", f.beta, "time-decay exponent of the drift");
    cmd.add_option("--rho", f.rho, "sets F(1) = rho, F(-1) = -rho");
    cmd.add_option("--f-plus", f.f_plus, "F(1)");
    cmd.add_option("--f-minus", f.f_minus, "F(-1)");
    cmd.add_option("--t0", f.t0, "initial time");
    cmd.add_option("--v0", f.v0, "initial velocity");
    cmd.add_option("--x0", f.x0, "initial position");
    cmd.add_option("--eps", f.eps, "scaling parameter epsilon");
    cmd.add_option("--paths", f.paths, "number of paths");
    cmd.add_option("--steps", f.steps, "number of time steps");
    cmd.add_option("--seed", f.seed, "master seed");
    cmd.add_option("--t-eval", f.t_eval, "evaluation times of the limit");
    cmd.add_option("--t-end", f.t_end, "simulation horizon");
    cmd.add_option("--grid", f.grid, "time grid spacing")->check(CLI::IsMember({"uniform", "log"}));
    cmd.add_option("--out", f.out, "output format")->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--threshold-margin", f.margin, "override of the KS discretization margins");
    cmd.add_option("--config", f.config_file, "JSON config file; its keys override flags");
    cmd.add_option("--output", f.output_file, "write to this file instead of stdout");
    cmd.add_option("--threads", f.threads, "worker threads (default: KLIM_THREADS or all cores)");
}

klim::ExperimentConfig resolve(klim::ExperimentConfig c, const Flags& f) {
    if (f.gamma || f.rho || f.f_plus || f.f_minus) {
        double fp = c.model.drift.f_plus();
        double fm = c.model.drift.f_minus();
        if (f.rho) {
            fp = *f.rho;
            fm = -*f.rho;
        }
        if (f.f_plus) fp = *f.f_plus;
        if (f.f_minus) fm = *f.f_minus;
        c.model.drift = klim::DriftSpec::homogeneous(fp, fm, f.gamma.value_or(c.model.drift.gamma()));
    }
    if (f.beta) c.model.beta = *f.beta;
    if (f.t0) c.model.t0 = *f.t0;
    if (f.v0) c.model.v0 = *f.v0;
    if (f.x0) c.model.x0 = *f.x0;
    if (f.eps) c.epsilon = *f.eps;
    if (f.paths) c.n_paths = *f.paths;
    if (f.steps) c.n_steps = *f.steps;
    if (f.seed) c.seed = *f.seed;
    if (!f.t_eval.empty()) c.t_eval = f.t_eval;
    if (f.t_end) c.t_end = *f.t_end;
    if (f.grid) c.grid = *f.grid == "log" ? klim::TimeGrid::Spacing::logarithmic : klim::TimeGrid::Spacing::uniform;
    if (f.out) c.output = *f.out == "csv" ? klim::OutputFormat::csv : klim::OutputFormat::json;
    if (f.margin) c.threshold_margin = *f.margin;

    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw klim::ConfigError("config", "cannot open " + f.config_file);
        nlohmann::ordered_json patch;
        try {
            patch = nlohmann::ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw klim::ConfigError("config", e.what());
        }
        auto doc = klim::to_json(c);
        doc.merge_patch(patch);
        return klim::config_from_json(doc);
    }
    c.validate();
    return c;
}

unsigned threads_of(const Flags& f) { return f.threads != 0 ? f.threads : klim::default_thread_count(); }

// Runs `emit` against the requested output file or stdout.
template <class Emit>
void with_output(const Flags& f, Emit&& emit) {
    if (f.output_file.empty()) {
        emit(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream file(f.output_file, std::ios::binary);
    if (!file) throw klim::Error("cannot write " + f.output_file);
    emit(file);
    if (!file) throw klim::Error("write failed: " + f.output_file);
}

void emit_suite(const klim::SuiteReport& report, klim::OutputFormat format, std::ostream& out) {
    if (format == klim::OutputFormat::csv)
        klim::write_summary_csv(report, out);
    else
        out << klim::to_json(report).dump(2) << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"Simulation and limit-law verification for a time-inhomogeneous kinetic SDE"};
    app.require_subcommand(1);

    Flags sim_flags;
    std::string binary_file;
    auto* simulate = app.add_subcommand("simulate", "simulate paths and write them as CSV");
    add_common(*simulate, sim_flags);
    std::string scheme = "auto";
    simulate->add_option("--scheme", scheme, "auto, euler or tamed_euler")
        ->check(CLI::IsMember({"auto", "euler", "tamed_euler"}));
    simulate->add_option("--binary", binary_file, "also write the little-endian binary bundle here");

    Flags verify_flags;
    std::string suite_name;
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite_name, "suite name")
        ->required()
        ->check(CLI::IsMember({"supercritical", "critical", "subcritical", "moments", "gronwall", "invariant",
                               "timechange", "explosion"}));
    add_common(*verify, verify_flags);

    Flags explosion_flags;
    auto* explosion = app.add_subcommand("explosion-prob", "fraction of paths crossing the explosion threshold");
    add_common(*explosion, explosion_flags);

    Flags sample_flags;
    std::string family = "pi";
    auto* sample = app.add_subcommand("sample-invariant", "draw from an invariant law of the homogenized equation");
    add_common(*sample, sample_flags);
    sample->add_option("--family", family, "lambda or pi")->check(CLI::IsMember({"lambda", "pi"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }

    try {
        if (*simulate) {
            auto base = klim::ExperimentConfig{};
            base.scheme = klim::scheme_from_string(scheme);
            const auto c = resolve(base, sim_flags);
            const auto grid = c.grid == klim::TimeGrid::Spacing::logarithmic
                                  ? klim::TimeGrid::logarithmic(c.model.t0, c.horizon(), c.n_steps)
                                  : klim::TimeGrid::uniform(c.model.t0, c.horizon(), c.n_steps);
            klim::SimOptions opts;
            opts.scheme = c.scheme;
            opts.explosion_threshold = c.explosion_threshold;
            opts.threads = threads_of(sim_flags);
            const auto bundle = klim::simulate_ske(c.model, grid, c.n_paths, klim::RngPolicy{c.seed}, opts);
            with_output(sim_flags, [&](std::ostream& out) { klim::write_csv(bundle, out); });
            if (!binary_file.empty()) {
                std::ofstream bin(binary_file, std::ios::binary);
                if (!bin) throw klim::Error("cannot write " + binary_file);
                klim::write_binary(bundle, bin);
            }
            return kPass;
        }
        if (*verify) {
            const auto kind = klim::suite_from_string(suite_name);
            const auto c = resolve(klim::default_config(kind), verify_flags);
            const auto report = klim::run_suite(kind, c, threads_of(verify_flags));
            with_output(verify_flags, [&](std::ostream& out) { emit_suite(report, c.output, out); });
            return report.pass() ? kPass : kFail;
        }
        if (*explosion) {
            const auto c = resolve(klim::default_config(klim::SuiteKind::explosion), explosion_flags);
            klim::SuiteReport report;
            report.suite = "explosion-prob";
            report.regime = std::string(klim::to_string(klim::classify_regime(c.model).tag));
            report.parameters = klim::to_json(c);
            report.epsilon = c.epsilon;
            report.tests.push_back(klim::explosion_probability(c, threads_of(explosion_flags)));
            with_output(explosion_flags, [&](std::ostream& out) { emit_suite(report, c.output, out); });
            return report.pass() ? kPass : kFail;
        }
        if (*sample) {
            auto base = klim::ExperimentConfig{};
            base.model.drift = klim::DriftSpec::homogeneous(1.0, -1.0, 1.0);
            const auto c = resolve(base, sample_flags);
            const auto& drift = c.model.drift;
            const auto law = family == "lambda" ? klim::DensitySpec::lambda_f(drift)
                                                : klim::DensitySpec::pi_f(drift.f_plus(), drift.gamma());
            const auto draws = law.sample(c.n_paths, klim::RngPolicy{c.seed}, threads_of(sample_flags));
            with_output(sample_flags, [&](std::ostream& out) {
                out << "sample\n";
                for (double x : draws) out << klim::format_double(x) << '\n';
            });
            return kPass;
        }
    } catch (const klim::PreconditionError& e) {
        std::cerr << "klim: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "klim: " << e.what() << '\n';
        return kRuntime;
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
