#include "klim/model.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "klim/error.hpp"

namespace klim {
namespace {

struct CatalogEntry {
    std::string_view id;
    double (*fn)(double);
    double gamma;
    double bound_K;
    bool dissipative;
};

double rational_drift(double v) { return v / (1.0 + v * v); }

constexpr std::array<CatalogEntry, 1> kCatalog{{
    {"rational", &rational_drift, 0.0, 1.0, true},
}};

}  // namespace

DriftSpec DriftSpec::homogeneous(double f_plus, double f_minus, double gamma, double bound_K) {
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
        throw PreconditionError("drift coefficients must be finite");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw PreconditionError("drift exponent gamma must be finite and >= 0");
    DriftSpec d;
    d.kind_ = Kind::homogeneous;
    d.f_plus_ = f_plus;
    d.f_minus_ = f_minus;
    d.gamma_ = gamma;
    const double natural = std::max(std::abs(f_plus), std::abs(f_minus));
    if (bound_K > 0.0) {
        if (bound_K < natural)
            throw PreconditionError("bound_K is smaller than max(|F(1)|, |F(-1)|)");
        d.bound_K_ = bound_K;
    } else {
        d.bound_K_ = natural > 0.0 ? natural : 1.0;
    }
    d.dissipative_ = f_plus >= 0.0 && f_minus <= 0.0;
    return d;
}

DriftSpec DriftSpec::catalog(std::string_view id) {
    for (std::size_t i = 0; i < kCatalog.size(); ++i) {
        if (kCatalog[i].id != id) continue;
        DriftSpec d;
        d.kind_ = Kind::bounded_catalog;
        d.gamma_ = kCatalog[i].gamma;
        d.bound_K_ = kCatalog[i].bound_K;
        d.dissipative_ = kCatalog[i].dissipative;
        d.catalog_id_ = std::string(id);
        d.catalog_index_ = static_cast<int>(i);
        d.f_plus_ = kCatalog[i].fn(1.0);
        d.f_minus_ = kCatalog[i].fn(-1.0);
        return d;
    }
    throw PreconditionError("unknown catalog drift '" + std::string(id) + "'");
}

bool DriftSpec::odd() const noexcept {
    if (kind_ == Kind::homogeneous) return f_plus_ == -f_minus_;
    return catalog_id_ == "rational";
}

double DriftSpec::operator()(double v) const noexcept {
    if (kind_ == Kind::bounded_catalog) return kCatalog[catalog_index_].fn(v);
    if (v > 0.0) return gamma_ == 1.0 ? f_plus_ * v : f_plus_ * std::pow(v, gamma_);
    if (v < 0.0) return gamma_ == 1.0 ? -f_minus_ * v : f_minus_ * std::pow(-v, gamma_);
    return 0.0;
}

double eval_drift(const DriftSpec& drift, double v) noexcept { return drift(v); }

void ModelSpec::validate() const {
    if (!std::isfinite(beta)) throw ConfigError("beta", "must be finite");
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw ConfigError("t0", "must be finite and > 0");
    if (!(v0 > 0.0) || !std::isfinite(v0)) throw ConfigError("v0", "must be finite and > 0");
    if (!std::isfinite(x0)) throw ConfigError("x0", "must be finite");
}

Regime classify_regime(const ModelSpec& spec, double tol) noexcept {
    const double q = spec.q();
    if (q > 0.5 + tol) return {RegimeTag::super_critical, q};
    if (q < 0.5 - tol) return {RegimeTag::sub_critical, q};
    return {RegimeTag::critical, q};
}

std::string_view to_string(RegimeTag tag) noexcept {
    switch (tag) {
        case RegimeTag::super_critical: return "super_critical";
        case RegimeTag::critical: return "critical";
        case RegimeTag::sub_critical: return "sub_critical";
    }
    return "unknown";
}

ExplosionVerdict explosion_verdict(const ModelSpec& spec) noexcept {
    const DriftSpec& d = spec.drift;
    if (d.gamma() <= 1.0 || d.dissipative()) return ExplosionVerdict::almost_surely_global;
    if (d.is_homogeneous() && d.gamma() > 1.0) {
        const double fp = d.f_plus();
        const double fm = d.f_minus();
        if ((fm > 0.0 && fp >= 0.0) || fp < 0.0) return ExplosionVerdict::explosion_with_positive_prob;
    }
    if (2.0 * spec.q() > 1.0) return ExplosionVerdict::global_with_positive_prob;
    return ExplosionVerdict::unknown;
}

std::string_view to_string(ExplosionVerdict verdict) noexcept {
    switch (verdict) {
        case ExplosionVerdict::almost_surely_global: return "almost_surely_global";
        case ExplosionVerdict::global_with_positive_prob: return "global_with_positive_prob";
        case ExplosionVerdict::explosion_with_positive_prob: return "explosion_with_positive_prob";
        case ExplosionVerdict::unknown: return "unknown";
    }
    return "unknown";
}

nlohmann::ordered_json to_json(const ModelSpec& spec) {
    nlohmann::ordered_json j;
    const DriftSpec& d = spec.drift;
    j["kind"] = d.is_homogeneous() ? "homogeneous" : "bounded-catalog";
    j["f_plus"] = d.f_plus();
    j["f_minus"] = d.f_minus();
    j["gamma"] = d.gamma();
    j["bound_K"] = d.bound_K();
    if (d.is_homogeneous())
        j["catalog_id"] = nullptr;
    else
        j["catalog_id"] = d.catalog_id();
    j["beta"] = spec.beta;
    j["t0"] = spec.t0;
    j["v0"] = spec.v0;
    j["x0"] = spec.x0;
    return j;
}

namespace {

double number_field(const nlohmann::ordered_json& doc, const char* key, double fallback) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return fallback;
    if (!it->is_number()) throw ConfigError(key, "expected a number, got " + std::string(it->type_name()));
    return it->get<double>();
}

}  // namespace

ModelSpec model_from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object()) throw ConfigError("model", "expected a JSON object");
    ModelSpec spec;
    std::string kind = "homogeneous";
    if (auto it = doc.find("kind"); it != doc.end() && !it->is_null()) {
        if (!it->is_string()) throw ConfigError("kind", "expected a string");
        kind = it->get<std::string>();
    }
    try {
        if (kind == "homogeneous") {
            spec.drift = DriftSpec::homogeneous(number_field(doc, "f_plus", 0.0),
                                                number_field(doc, "f_minus", 0.0),
                                                number_field(doc, "gamma", 0.0),
                                                number_field(doc, "bound_K", 0.0));
        } else if (kind == "bounded-catalog") {
            auto it = doc.find("catalog_id");
            if (it == doc.end() || !it->is_string()) throw ConfigError("catalog_id", "expected a catalog name");
            spec.drift = DriftSpec::catalog(it->get<std::string>());
        } else {
            throw ConfigError("kind", "expected 'homogeneous' or 'bounded-catalog', got '" + kind + "'");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const PreconditionError& e) {
        throw ConfigError("drift", e.what());
    }
    spec.beta = number_field(doc, "beta", spec.beta);
    spec.t0 = number_field(doc, "t0", spec.t0);
    spec.v0 = number_field(doc, "v0", spec.v0);
    spec.x0 = number_field(doc, "x0", spec.x0);
    spec.validate();
    return spec;
}

}  // namespace klim
