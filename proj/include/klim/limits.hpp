#pragma once

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "klim/invariant.hpp"
#include "klim/model.hpp"
#include "klim/path_bundle.hpp"

namespace klim {

/// Paths rescaled as (eps^a V_{t/eps}, eps^b X_{t/eps}) at the times `t`.
struct RescaledEnsemble {
    double epsilon = 1.0;
    double a = 0.0;
    double b = 0.0;
    std::vector<double> t;
    /// True where t/eps fell strictly between source nodes and was linearly interpolated.
    std::vector<std::uint8_t> interpolated;
    std::size_t n_paths = 0;
    std::vector<double> v_scaled;  // row-major [path][time]
    std::vector<double> x_scaled;
    std::vector<std::uint8_t> valid;  // same shape

    std::size_t n_times() const noexcept { return t.size(); }
    double v_at(std::size_t i, std::size_t j) const noexcept { return v_scaled[i * n_times() + j]; }
    double x_at(std::size_t i, std::size_t j) const noexcept { return x_scaled[i * n_times() + j]; }
    bool valid_at(std::size_t i, std::size_t j) const noexcept { return valid[i * n_times() + j] != 0; }
    std::vector<double> v_column(std::size_t j) const;
    std::vector<double> x_column(std::size_t j) const;
};

/// Throws RangeError when some t/eps is outside the simulated window.
RescaledEnsemble rescale(const PathBundle& bundle, double epsilon, double a, double b, std::span<const double> t);

struct KolmogorovPair {};                  ///< (B_t, int_0^t B)
struct CriticalLaw { DriftSpec drift; };   ///< sqrt(t) H~_{log t}, H~ stationary with law Lambda_F
struct SubcriticalVelocity {               ///< t^q U_t, U_t i.i.d. Pi_F across distinct times
    double rho;
    double gamma;
    double q;
};
struct SubcriticalPosition {  ///< centered Gaussian, K(s,t) = (s^t)^{1+2 beta} / (rho^2 (1 + 2 beta))
    double rho;
    double beta;
};

using LimitLaw = std::variant<KolmogorovPair, CriticalLaw, SubcriticalVelocity, SubcriticalPosition>;

/// Entries that exist for the law: vv = Cov(V_s, V_t), vx = Cov(V_s, X_t), xv = Cov(X_s, V_t), xx = Cov(X_s, X_t).
struct CovBlock {
    std::optional<double> vv;
    std::optional<double> vx;
    std::optional<double> xv;
    std::optional<double> xx;
};

CovBlock theoretical_cov(const LimitLaw& law, double s, double t);

struct Gaussian {
    double mean = 0.0;
    double variance = 0.0;
};

/// Marginal at one time: a Gaussian or the law of scale * Z with Z drawn from `base`.
class MarginalLaw {
public:
    MarginalLaw(Gaussian g) : law_(g) {}  // NOLINT(google-explicit-constructor)
    MarginalLaw(DensitySpec base, double scale) : law_(Scaled{std::move(base), scale}) {}

    bool is_gaussian() const noexcept { return std::holds_alternative<Gaussian>(law_); }
    double cdf(double x) const;
    double mean() const;
    double variance() const;

private:
    struct Scaled {
        DensitySpec base;
        double scale;
    };
    std::variant<Gaussian, Scaled> law_;
};

/// Velocity marginal (position marginal for SubcriticalPosition) at time t >= 0.
MarginalLaw marginal_law(const LimitLaw& law, double t);

enum class Component { velocity, position, joint };

/// Row-major symmetric matrix.
struct CovMatrix {
    std::size_t n = 0;
    std::vector<double> entries;
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * n + j]; }
};

/// Covariance of the law at `times`; joint orders the vector (V_t1..V_td, X_t1..X_td).
/// Throws UnsupportedError for non-Gaussian critical laws and Error if the assembled
/// matrix has an eigenvalue below -1e-10.
CovMatrix fdd_covariance_matrix(const LimitLaw& law, std::span<const double> times,
                                Component component = Component::velocity);

double min_eigenvalue(const CovMatrix& m);

/// Cov(int_0^s V, int_0^t V) by nested adaptive quadrature of the velocity covariance.
/// Used to cross-check closed forms and Monte Carlo estimates for the position limits.
double position_cov_by_quadrature(const LimitLaw& law, double s, double t);

}  // namespace klim
