#include "klim/limits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "klim/error.hpp"

namespace klim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Symmetric linear drift F(v) = a v makes H~ an OU process with rate 1/2 + a.
struct LinearCritical {
    double rate;
    double variance;
};

std::optional<LinearCritical> linear_critical(const DriftSpec& drift) {
    if (!drift.is_homogeneous() || drift.gamma() != 1.0 || drift.f_minus() != -drift.f_plus()) return std::nullopt;
    const double rate = 0.5 + drift.f_plus();
    if (!(rate > 0.0)) return std::nullopt;
    return LinearCritical{rate, 1.0 / (2.0 * rate)};
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> RescaledEnsemble::v_column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (valid_at(i, j)) out.push_back(v_at(i, j));
    return out;
}

std::vector<double> RescaledEnsemble::x_column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        if (valid_at(i, j)) out.push_back(x_at(i, j));
    return out;
}

RescaledEnsemble rescale(const PathBundle& bundle, double epsilon, double a, double b, std::span<const double> t) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw PreconditionError("epsilon must lie in (0, 1]");
    RescaledEnsemble out;
    out.epsilon = epsilon;
    out.a = a;
    out.b = b;
    out.t.assign(t.begin(), t.end());
    out.interpolated.assign(t.size(), 0);
    out.n_paths = bundle.n_paths;
    out.v_scaled.assign(bundle.n_paths * t.size(), 0.0);
    out.x_scaled.assign(bundle.n_paths * t.size(), 0.0);
    out.valid.assign(bundle.n_paths * t.size(), 0);

    const double v_factor = std::pow(epsilon, a);
    const double x_factor = std::pow(epsilon, b);
    const TimeGrid& grid = bundle.grid;
    for (std::size_t j = 0; j < t.size(); ++j) {
        const double source = t[j] / epsilon;
        std::size_t left;
        double w = 0.0;
        if (auto k = grid.find_node(source)) {
            left = *k;
        } else {
            if (source < grid.t_start() || source > grid.t_end()) {
                std::ostringstream msg;
                msg << "t/eps = " << source << " outside the simulated horizon [" << grid.t_start() << ", "
                    << grid.t_end() << "]";
                throw RangeError(msg.str());
            }
            left = grid.locate(source);
            w = (source - grid[left]) / (grid[left + 1] - grid[left]);
            out.interpolated[j] = 1;
        }
        for (std::size_t i = 0; i < bundle.n_paths; ++i) {
            const std::size_t idx = i * t.size() + j;
            const bool ok = bundle.valid(i, left) && (w == 0.0 || bundle.valid(i, left + 1));
            out.valid[idx] = ok;
            if (!ok) {
                out.v_scaled[idx] = out.x_scaled[idx] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            double v = bundle.v_at(i, left);
            double x = bundle.x_at(i, left);
            if (w != 0.0) {
                v = (1.0 - w) * v + w * bundle.v_at(i, left + 1);
                x = (1.0 - w) * x + w * bundle.x_at(i, left + 1);
            }
            out.v_scaled[idx] = v_factor * v;
            out.x_scaled[idx] = x_factor * x;
        }
    }
    return out;
}

CovBlock theoretical_cov(const LimitLaw& law, double s, double t) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw PreconditionError("covariance times must be non-negative");
    const double lo = std::min(s, t);
    const double hi = std::max(s, t);
    return std::visit(
        overloaded{
            [&](const KolmogorovPair&) {
                // Cov(B_u, B_r) = u ^ r integrated once or twice.
                auto bx = [](double u, double r) { return u <= r ? u * r - 0.5 * u * u : 0.5 * r * r; };
                CovBlock c;
                c.vv = lo;
                c.vx = bx(s, t);
                c.xv = bx(t, s);
                c.xx = lo * lo * (3.0 * hi - lo) / 6.0;
                return c;
            },
            [&](const CriticalLaw& l) {
                auto lin = linear_critical(l.drift);
                if (!lin)
                    throw UnsupportedError(
                        "critical covariance is closed-form only for the symmetric linear drift (gamma = 1)");
                CovBlock c;
                c.vv = hi == 0.0 ? 0.0
                                 : lin->variance * std::pow(lo, lin->rate + 0.5) * std::pow(hi, 0.5 - lin->rate);
                return c;
            },
            [&](const SubcriticalVelocity& l) {
                CovBlock c;
                c.vv = s == t ? std::pow(t, 2.0 * l.q) * pi_f_variance(l.rho, l.gamma) : 0.0;
                return c;
            },
            [&](const SubcriticalPosition& l) {
                CovBlock c;
                c.xx = std::pow(lo, 1.0 + 2.0 * l.beta) / (l.rho * l.rho * (1.0 + 2.0 * l.beta));
                return c;
            },
        },
        law);
}

double MarginalLaw::cdf(double x) const {
    return std::visit(overloaded{
                          [x](const Gaussian& g) {
                              if (g.variance <= 0.0) return x < g.mean ? 0.0 : 1.0;
                              return standard_normal_cdf((x - g.mean) / std::sqrt(g.variance));
                          },
                          [x](const Scaled& s) {
                              if (s.scale <= 0.0) return x < 0.0 ? 0.0 : 1.0;
                              return s.base.cdf(x / s.scale);
                          },
                      },
                      law_);
}

double MarginalLaw::mean() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.mean; },
                          [](const Scaled& s) { return s.scale * s.base.moment(1); },
                      },
                      law_);
}

double MarginalLaw::variance() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.variance; },
                          [](const Scaled& s) { return s.scale * s.scale * s.base.variance(); },
                      },
                      law_);
}

MarginalLaw marginal_law(const LimitLaw& law, double t) {
    if (!(t >= 0.0)) throw PreconditionError("marginal time must be non-negative");
    return std::visit(overloaded{
                          [t](const KolmogorovPair&) { return MarginalLaw(Gaussian{0.0, t}); },
                          [t](const CriticalLaw& l) {
                              if (auto lin = linear_critical(l.drift))
                                  return MarginalLaw(Gaussian{0.0, t * lin->variance});
                              return MarginalLaw(DensitySpec::lambda_f(l.drift), std::sqrt(t));
                          },
                          [t](const SubcriticalVelocity& l) {
                              const double scale = std::pow(t, l.q);
                              if (l.gamma == 1.0)
                                  return MarginalLaw(Gaussian{0.0, scale * scale / (2.0 * l.rho)});
                              return MarginalLaw(DensitySpec::pi_f(l.rho, l.gamma), scale);
                          },
                          [t](const SubcriticalPosition& l) {
                              return MarginalLaw(Gaussian{0.0, *theoretical_cov(l, t, t).xx});
                          },
                      },
                      law);
}

double min_eigenvalue(const CovMatrix& m) {
    Eigen::MatrixXd a(m.n, m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

CovMatrix fdd_covariance_matrix(const LimitLaw& law, std::span<const double> times, Component component) {
    if (std::holds_alternative<CriticalLaw>(law) && !linear_critical(std::get<CriticalLaw>(law).drift))
        throw UnsupportedError("f.d.d. covariance of a non-Gaussian critical law has no closed form");
    const std::size_t d = times.size();
    const bool joint = component == Component::joint;
    if (joint && !std::holds_alternative<KolmogorovPair>(law))
        throw UnsupportedError("joint velocity/position covariance is closed-form only for the Kolmogorov pair");
    if (component == Component::position && !std::holds_alternative<KolmogorovPair>(law) &&
        !std::holds_alternative<SubcriticalPosition>(law))
        throw UnsupportedError("position covariance is not available in closed form for this law");
    if (component == Component::velocity && std::holds_alternative<SubcriticalPosition>(law))
        throw UnsupportedError("the sub-critical position law carries no velocity covariance");

    CovMatrix m;
    m.n = joint ? 2 * d : d;
    m.entries.assign(m.n * m.n, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const CovBlock c = theoretical_cov(law, times[i], times[j]);
            if (joint) {
                m.entries[i * m.n + j] = *c.vv;
                m.entries[i * m.n + d + j] = *c.vx;
                m.entries[(d + i) * m.n + j] = *c.xv;
                m.entries[(d + i) * m.n + d + j] = *c.xx;
            } else {
                m.entries[i * m.n + j] = component == Component::velocity ? *c.vv : *c.xx;
            }
        }
    }
    const double lambda = min_eigenvalue(m);
    if (lambda < -1e-10) {
        std::ostringstream msg;
        msg << "assembled covariance is not positive semi-definite (min eigenvalue " << lambda << ")";
        throw Error(msg.str());
    }
    return m;
}

double position_cov_by_quadrature(const LimitLaw& law, double s, double t) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    if (!std::holds_alternative<KolmogorovPair>(law) && !std::holds_alternative<CriticalLaw>(law))
        throw UnsupportedError("position covariance by quadrature needs a continuous velocity covariance");
    auto k = [&law](double u, double r) { return *theoretical_cov(law, u, r).vv; };
    if (s <= 0.0 || t <= 0.0) return 0.0;
    auto inner = [&](double r) {
        // Integrate u over [0, s]; the covariance has a kink at u = r.
        const double split = std::clamp(r, 0.0, s);
        double total = 0.0;
        if (split > 0.0) total += GK::integrate([&](double u) { return k(u, r); }, 0.0, split, 15, 1e-12);
        if (split < s) total += GK::integrate([&](double u) { return k(u, r); }, split, s, 15, 1e-12);
        return total;
    };
    const double split = std::min(s, t);
    double total = GK::integrate(inner, 0.0, split, 15, 1e-11);
    if (split < t) total += GK::integrate(inner, split, t, 15, 1e-11);
    return total;
}

}  // namespace klim
