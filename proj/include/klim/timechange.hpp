#pragma once

#include <limits>

#include "klim/path_bundle.hpp"

namespace klim {

/// Change of time phi: [0, t1) -> [t0, inf) used by the scaling transformation
/// omega(s) -> omega(phi(s)) / sqrt(phi'(s)).
///
/// exponential: phi(s) = t0 e^s.
/// power:       phi(s) = (t0^{1-2q} + (1-2q) s)^{1/(1-2q)}, solving phi' = phi^{2q}, phi(0) = t0.
///              For 2q > 1 the domain ends at t1 = t0^{1-2q} / (2q-1); 2q = 1 is the exponential case.
class TimeChange {
public:
    enum class Kind { exponential, power };

    static TimeChange exponential(double t0);
    /// Falls back to the exponential kind when |2q - 1| <= tol.
    static TimeChange power(double t0, double q, double tol = 1e-12);

    Kind kind() const noexcept { return kind_; }
    double t0() const noexcept { return t0_; }
    /// Exponent with phi' = phi^{2q}; 1/2 for the exponential kind.
    double q() const noexcept { return q_; }
    /// Right end of the domain (+inf unless power with 2q > 1).
    double t1() const noexcept { return t1_; }

    double phi(double s) const;
    double phi_prime(double s) const;
    double phi_second(double s) const;
    double phi_inverse(double t) const;

private:
    TimeChange(Kind kind, double t0, double q, double t1) : kind_(kind), t0_(t0), q_(q), t1_(t1) {}
    void check_domain(double s) const;

    Kind kind_;
    double t0_;
    double q_;
    double t1_;
};

/// Closed form of phi_q^{-1}(t/eps) - phi_q^{-1}(s/eps) = (t^{1-2q} - s^{1-2q}) / ((1-2q) eps^{1-2q}), 2q != 1.
double power_time_gap(double q, double s, double t, double eps);

/// Component-wise Phi_phi on `s_grid`: value(phi(s)) / sqrt(phi'(s)), with values at phi(s)
/// taken exactly at matching source nodes and linearly interpolated otherwise.
/// Throws RangeError when some phi(s) leaves [bundle.t_start, bundle.t_end].
PathBundle apply_scaling(const PathBundle& bundle, const TimeChange& tc, const TimeGrid& s_grid);

/// Inverse map omega(t) = sqrt(phi'(phi^{-1}(t))) * omega~(phi^{-1}(t)) evaluated on `t_grid`.
PathBundle inverse_scaling(const PathBundle& bundle, const TimeChange& tc, const TimeGrid& t_grid);

/// s-grid whose image under phi is exactly `t_grid` (phi^{-1} of each node).
TimeGrid pullback_grid(const TimeChange& tc, const TimeGrid& t_grid);

/// t-grid phi(s_k) of an s-grid.
TimeGrid pushforward_grid(const TimeChange& tc, const TimeGrid& s_grid);

}  // namespace klim
