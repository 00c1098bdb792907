#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "klim/model.hpp"
#include "klim/path_bundle.hpp"
#include "klim/rng.hpp"
#include "klim/time_grid.hpp"

namespace klim {

enum class Scheme {
    automatic,    ///< tamed_euler when gamma > 1, euler otherwise
    euler,        ///< v += b dt + dW
    tamed_euler,  ///< v += b dt / (1 + dt |b|) + dW
};

std::string_view to_string(Scheme scheme) noexcept;
Scheme scheme_from_string(std::string_view name);

inline constexpr double kDefaultExplosionThreshold = 1e6;

struct SimOptions {
    Scheme scheme = Scheme::automatic;
    double explosion_threshold = kDefaultExplosionThreshold;
    /// Grid indices to keep in the PathBundle; empty keeps every node. Node 0 is always kept.
    std::vector<std::size_t> record;
    /// Worker threads (0 = default_thread_count()). Never changes the output.
    unsigned threads = 0;
};

/// Per-path starting values: a single shared value or one value per path.
class InitialValues {
public:
    InitialValues(double value) : values_{value} {}  // NOLINT(google-explicit-constructor)
    InitialValues(std::vector<double> values) : values_(std::move(values)) {}  // NOLINT
    double operator[](std::size_t path) const noexcept { return values_.size() == 1 ? values_[0] : values_[path]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
};

/// Euler-type simulation of dV = dB - t^{-beta} F(V) dt, dX = V dt on `grid`
/// (grid.t_start() must equal spec.t0). X is advanced by the trapezoid rule.
/// Throws ExplosionError if every path crosses the explosion threshold.
PathBundle simulate_ske(const ModelSpec& spec, const TimeGrid& grid, std::size_t n_paths, const RngPolicy& rng,
                        const SimOptions& options = {});

/// dH = dW - H/2 ds - F(H) ds, the homogeneous equation of the critical regime (q = 1/2).
PathBundle simulate_exponential_homogenized(const ModelSpec& spec, const TimeGrid& s_grid, std::size_t n_paths,
                                            const RngPolicy& rng, const InitialValues& h0,
                                            const SimOptions& options = {});

/// dH = dW - F(H) ds for F = rho sgn(v)|v|^gamma with rho > 0 and gamma >= 1.
PathBundle simulate_power_homogenized(const DriftSpec& drift, const TimeGrid& s_grid, std::size_t n_paths,
                                      const RngPolicy& rng, const InitialValues& h0,
                                      const SimOptions& options = {});

/// Power-changed-time velocity V^(q) = Phi_q(V):
///   dV = dW - phi_q^{-gamma q}(s) F(sqrt(phi_q'(s)) V) ds - q phi_q^{2q-1}(s) V ds,  V_0 = v0 / t0^q.
/// Requires 2q != 1 and s_grid inside [0, t1).
PathBundle simulate_power_changed_time(const ModelSpec& spec, const TimeGrid& s_grid, std::size_t n_paths,
                                       const RngPolicy& rng, const SimOptions& options = {});

/// Exact Gaussian transitions of dH = sigma dW - theta H ds.
PathBundle simulate_ou_exact(double theta, double sigma, const TimeGrid& grid, std::size_t n_paths,
                             const RngPolicy& rng, const InitialValues& h0, const SimOptions& options = {});

}  // namespace klim
