#include "klim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "klim/error.hpp"

namespace klim {

TestReport make_report(std::string name, double statistic, double threshold, std::size_t n,
                       nlohmann::ordered_json metadata) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.threshold = threshold;
    r.n = n;
    r.pass = statistic <= threshold;
    r.metadata = std::move(metadata);
    return r;
}

nlohmann::ordered_json to_json(const TestReport& report) {
    nlohmann::ordered_json j;
    j["name"] = report.name;
    j["statistic"] = report.statistic;
    j["threshold"] = report.threshold;
    j["n"] = report.n;
    j["pass"] = report.pass;
    j["metadata"] = report.metadata;
    return j;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 32) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
    if (values.empty()) throw PreconditionError("mean of an empty sample");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) throw PreconditionError("variance needs at least two samples");
    const double m = mean(values);
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [m](double v) { return (v - m) * (v - m); });
    return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) ++i;
        while (j < y.size() && y[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

TestReport ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf, double margin,
                         std::string name) {
    if (samples.size() < kMinKsSamples) throw PreconditionError("too few samples for a KS test (need >= 100)");
    const double n = static_cast<double>(samples.size());
    const double critical = kKsCritical / std::sqrt(n);
    nlohmann::ordered_json meta;
    meta["critical_value"] = critical;
    meta["margin"] = margin;
    return make_report(std::move(name), ks_statistic(samples, cdf), critical + margin, samples.size(), meta);
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double margin, std::string name) {
    if (a.size() < kMinKsSamples || b.size() < kMinKsSamples)
        throw PreconditionError("too few samples for a KS test (need >= 100 each)");
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    const double critical = kKsCritical * std::sqrt((n + m) / (n * m));
    nlohmann::ordered_json meta;
    meta["critical_value"] = critical;
    meta["margin"] = margin;
    meta["n_other"] = b.size();
    return make_report(std::move(name), ks_statistic(a, b), critical + margin, a.size(), meta);
}

Estimate empirical_moment(std::span<const double> samples, double kappa) {
    if (samples.empty()) throw PreconditionError("moment of an empty sample");
    if (!(kappa >= 0.0)) throw PreconditionError("moment order must be >= 0");
    std::vector<double> p(samples.size());
    std::transform(samples.begin(), samples.end(), p.begin(),
                   [kappa](double x) { return kappa == 0.0 ? 1.0 : std::pow(std::abs(x), kappa); });
    const double m = mean(p);
    const double se = p.size() > 1 ? std::sqrt(sample_variance(p) / static_cast<double>(p.size())) : 0.0;
    return {m, se};
}

Estimate sample_covariance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw PreconditionError("covariance needs paired samples");
    const std::size_t n = a.size();
    if (n < 3) throw PreconditionError("covariance needs at least three pairs");
    const double ma = mean(a);
    const double mb = mean(b);
    std::vector<double> prod(n);
    for (std::size_t i = 0; i < n; ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    const double sxy = pairwise_sum(prod);
    const double nd = static_cast<double>(n);
    const double value = sxy / (nd - 1.0);

    // Leave-one-out covariances on the centred data: sums become -a_i, -b_i, sxy - a_i b_i.
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        loo[i] = (sxy - da * db - da * db / (nd - 1.0)) / (nd - 2.0);
    }
    const double loo_mean = mean(loo);
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (loo[i] - loo_mean) * (loo[i] - loo_mean);
    const double se = std::sqrt((nd - 1.0) / nd * pairwise_sum(dev));
    return {value, se};
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
    const double c = sample_covariance(a, b).value;
    return c / std::sqrt(sample_variance(a) * sample_variance(b));
}

Estimate empirical_cov(const RescaledEnsemble& ensemble, std::size_t s_index, std::size_t t_index, Pair pair) {
    if (s_index >= ensemble.n_times() || t_index >= ensemble.n_times()) throw RangeError("time index out of range");
    std::vector<double> a;
    std::vector<double> b;
    a.reserve(ensemble.n_paths);
    b.reserve(ensemble.n_paths);
    const bool first_v = pair == Pair::vv || pair == Pair::vx;
    const bool second_v = pair == Pair::vv || pair == Pair::xv;
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        if (!ensemble.valid_at(i, s_index) || !ensemble.valid_at(i, t_index)) continue;
        a.push_back(first_v ? ensemble.v_at(i, s_index) : ensemble.x_at(i, s_index));
        b.push_back(second_v ? ensemble.v_at(i, t_index) : ensemble.x_at(i, t_index));
    }
    if (a.size() < 100) throw PreconditionError("fewer than 100 valid paths for an empirical covariance");
    return sample_covariance(a, b);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("regression needs at least two paired points");
    const double mx = mean(x);
    const double my = mean(y);
    std::vector<double> sxy(x.size());
    std::vector<double> sxx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy[i] = (x[i] - mx) * (y[i] - my);
        sxx[i] = (x[i] - mx) * (x[i] - mx);
    }
    return pairwise_sum(sxy) / pairwise_sum(sxx);
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
    if (n == 0) throw PreconditionError("Wilson interval needs n > 0");
    const double nd = static_cast<double>(n);
    const double p = static_cast<double>(k) / nd;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nd)) / (1.0 + z2 / nd);
    const double half = z / (1.0 + z2 / nd) * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd));
    const double lower = k == 0 ? 0.0 : std::max(0.0, centre - half);
    const double upper = k == n ? 1.0 : std::min(1.0, centre + half);
    return {lower, upper};
}

double predicted_moment_exponent(const ModelSpec& spec, double kappa) {
    const double gamma = spec.drift.gamma();
    const bool dissipative = spec.drift.dissipative();
    if (!(kappa >= 0.0)) throw PreconditionError("kappa must be >= 0");
    if (dissipative) return kappa / 2.0;
    if (gamma < 1.0 && kappa <= 1.0) {
        if (spec.beta >= (gamma + 1.0) / 2.0) return kappa / 2.0;
        return kappa * (1.0 - spec.beta) / (1.0 - gamma);
    }
    std::ostringstream msg;
    msg << "moment bound hypotheses fail: need a dissipative drift, or gamma < 1 with kappa in [0, 1] (got gamma="
        << gamma << ", kappa=" << kappa << ", dissipative=false)";
    throw PreconditionError(msg.str());
}

TestReport moment_growth_check(const ModelSpec& spec, double kappa, double t_end, const RngPolicy& rng,
                               const MomentGrowthOptions& options) {
    const double predicted = predicted_moment_exponent(spec, kappa);
    if (!(t_end >= 10.0 * spec.t0)) throw PreconditionError("moment growth check needs t_end >= 10 t0");
    const TimeGrid grid = TimeGrid::logarithmic(spec.t0, t_end, options.n_steps);
    SimOptions sim = options.sim;
    sim.record.clear();
    for (std::size_t j = 0; j <= options.n_record; ++j)
        sim.record.push_back((j * options.n_steps + options.n_record / 2) / options.n_record);
    const PathBundle bundle = simulate_ske(spec, grid, options.n_paths, rng, sim);

    std::vector<double> log_t;
    std::vector<double> log_m;
    for (std::size_t k = 0; k < bundle.n_times(); ++k) {
        const double t = bundle.grid[k];
        if (t < t_end / 10.0 * (1.0 - 1e-12)) continue;
        const auto column = bundle.v_column(k);
        log_t.push_back(std::log(t));
        log_m.push_back(std::log(empirical_moment(column, kappa).value));
    }
    const double slope = ols_slope(log_t, log_m);
    nlohmann::ordered_json meta;
    meta["kappa"] = kappa;
    meta["slope"] = slope;
    meta["predicted_exponent"] = predicted;
    meta["t_range"] = {t_end / 10.0, t_end};
    meta["n_points"] = log_t.size();
    meta["exploded"] = bundle.exploded_count();
    meta["scheme"] = to_string(options.sim.scheme);
    return make_report("moment_growth", slope - predicted, options.slope_margin, options.n_paths, meta);
}

namespace {

void check_table(std::span<const double> t, std::span<const double> values, const char* what) {
    if (values.size() != t.size()) throw PreconditionError(std::string(what) + " table does not match the grid");
}

}  // namespace

std::vector<double> gronwall_bound(std::span<const double> t, std::span<const double> a, std::span<const double> b,
                                   double r) {
    check_table(t, a, "a");
    check_table(t, b, "b");
    const double e = 1.0 / (1.0 - r);
    const double c = std::pow(2.0, e);
    std::vector<double> bound(t.size());
    double int_b = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0) int_b += 0.5 * (t[k] - t[k - 1]) * (b[k] + b[k - 1]);
        bound[k] = c * (a[k] + std::pow((1.0 - r) * int_b, e));
    }
    return bound;
}

TestReport gronwall_check(std::span<const double> t, std::span<const double> a, std::span<const double> b, double r,
                          std::span<const double> g) {
    if (!(r >= 0.0 && r < 1.0)) throw PreconditionError("Gronwall exponent r must lie in [0, 1)");
    if (t.size() < 2) throw PreconditionError("Gronwall check needs at least two nodes");
    check_table(t, a, "a");
    check_table(t, b, "b");
    check_table(t, g, "g");
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(b[k] > 0.0)) throw PreconditionError("Gronwall check needs b > 0");
        if (!(g[k] >= 0.0)) throw PreconditionError("Gronwall check needs g >= 0");
        if (k > 0 && !(t[k] > t[k - 1])) throw PreconditionError("Gronwall grid must be increasing");
    }

    // Premise on the grid.
    double integral = 0.0;
    double worst_premise = -std::numeric_limits<double>::infinity();
    std::size_t premise_node = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (k > 0)
            integral += 0.5 * (t[k] - t[k - 1]) * (b[k] * std::pow(g[k], r) + b[k - 1] * std::pow(g[k - 1], r));
        const double rhs = a[k] + integral;
        const double excess = (g[k] - rhs) / std::max(1.0, std::abs(rhs));
        if (excess > worst_premise) {
            worst_premise = excess;
            premise_node = k;
        }
    }
    constexpr double kPremiseTol = 1e-8;
    if (worst_premise > kPremiseTol) {
        nlohmann::ordered_json meta;
        meta["status"] = "premise failed";
        meta["node"] = premise_node;
        meta["r"] = r;
        return make_report("gronwall_premise", worst_premise, kPremiseTol, t.size(), meta);
    }

    const auto bound = gronwall_bound(t, a, b, r);
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_node = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double excess = (g[k] - bound[k]) / std::max(1.0, std::abs(bound[k]));
        if (excess > worst) {
            worst = excess;
            worst_node = k;
        }
    }
    nlohmann::ordered_json meta;
    meta["status"] = "premise holds";
    meta["r"] = r;
    meta["worst_node"] = worst_node;
    return make_report("gronwall_bound", worst, 0.0, t.size(), meta);
}

}  // namespace klim
