#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace klim {

/// Drift F of the velocity equation dV = dB - t^{-beta} F(V) dt.
///
/// Two families are supported: homogeneous drifts F(v) = F(sgn v)|v|^gamma,
/// given by the pair (F(1), F(-1)), and named bounded drifts from a small
/// built-in catalog whose magnitude is dominated by K|v|^gamma.
class DriftSpec {
public:
    enum class Kind { homogeneous, bounded_catalog };

    /// `bound_K` <= 0 selects max(|F(1)|, |F(-1)|) (or 1 for the zero drift).
    static DriftSpec homogeneous(double f_plus, double f_minus, double gamma, double bound_K = 0.0);
    /// rho * sgn(v)|v|^gamma, the drift family of the sub-critical limit.
    static DriftSpec power_law(double rho, double gamma) { return homogeneous(rho, -rho, gamma); }
    static DriftSpec catalog(std::string_view id);

    Kind kind() const noexcept { return kind_; }
    bool is_homogeneous() const noexcept { return kind_ == Kind::homogeneous; }
    double f_plus() const noexcept { return f_plus_; }
    double f_minus() const noexcept { return f_minus_; }
    double gamma() const noexcept { return gamma_; }
    double bound_K() const noexcept { return bound_K_; }
    const std::string& catalog_id() const noexcept { return catalog_id_; }

    /// v F(v) >= 0 for every v.
    bool dissipative() const noexcept { return dissipative_; }
    /// F(v) = -F(-v).
    bool odd() const noexcept;

    double operator()(double v) const noexcept;

private:
    DriftSpec() = default;

    Kind kind_ = Kind::homogeneous;
    double f_plus_ = 0.0;
    double f_minus_ = 0.0;
    double gamma_ = 0.0;
    double bound_K_ = 1.0;
    bool dissipative_ = true;
    std::string catalog_id_;
    int catalog_index_ = -1;
};

double eval_drift(const DriftSpec& drift, double v) noexcept;

/// Full problem instance for the kinetic equation started at (t0, v0, x0).
struct ModelSpec {
    DriftSpec drift = DriftSpec::homogeneous(0.0, 0.0, 0.0);
    double beta = 0.0;
    double t0 = 1.0;
    double v0 = 1.0;
    double x0 = 0.0;

    /// Regime exponent beta / (gamma + 1).
    double q() const noexcept { return beta / (drift.gamma() + 1.0); }

    /// Throws PreconditionError when t0 <= 0 or v0 <= 0 or a field is not finite.
    void validate() const;
};

enum class RegimeTag { super_critical, critical, sub_critical };

struct Regime {
    RegimeTag tag;
    double q;
};

inline constexpr double kRegimeTolerance = 1e-12;

Regime classify_regime(const ModelSpec& spec, double tol = kRegimeTolerance) noexcept;
std::string_view to_string(RegimeTag tag) noexcept;

enum class ExplosionVerdict {
    almost_surely_global,
    global_with_positive_prob,
    explosion_with_positive_prob,
    unknown,
};

ExplosionVerdict explosion_verdict(const ModelSpec& spec) noexcept;
std::string_view to_string(ExplosionVerdict verdict) noexcept;

nlohmann::ordered_json to_json(const ModelSpec& spec);
/// Reads the flat document {kind, f_plus, f_minus, gamma, bound_K, catalog_id, beta, t0, v0, x0}.
/// Missing keys take the ModelSpec defaults; mistyped keys throw ConfigError naming the key.
ModelSpec model_from_json(const nlohmann::ordered_json& doc);

}  // namespace klim
