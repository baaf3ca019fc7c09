#pragma once

#include <cmath>

#include "plap/errors.hpp"
#include "plap/geometry.hpp"

namespace plap {

/// Exponent of the quasilinear operator. Constrained to [1.05, 10] to keep
/// floating-point conditioning sane; the operator degenerates towards both
/// ends of (1, inf).
struct PExponent {
    double p;

    explicit PExponent(double value) : p(value) {
        if (!(value >= 1.05) || !(value <= 10.0)) {
            throw ConfigError("PExponent: p must lie in [1.05, 10]");
        }
    }
};

/// Smoothing parameter: |g|^2 is replaced by eps^2 + |g|^2 wherever the
/// kernel would otherwise degenerate at g = 0.
struct Regularization {
    double eps;

    explicit Regularization(double value = 0.0) : eps(value) {
        if (!(value >= 0.0)) {
            throw ConfigError("Regularization: eps must be >= 0");
        }
    }
};

struct Mat2 {
    // symmetric 2x2
    double xx = 0.0, xy = 0.0, yy = 0.0;

    Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

/// Regularized flux (eps^2 + |g|^2)^((p-2)/2) * g; the zero vector at
/// eps = 0, g = 0 (the continuous extension for p > 1).
inline Vec2 flux(PExponent p, Regularization eps, Vec2 g) {
    double m = eps.eps * eps.eps + norm_sq(g);
    if (m == 0.0) return {0.0, 0.0};
    return std::pow(m, 0.5 * p.p - 1.0) * g;
}

/// Jacobian of flux with respect to g:
///   sigma * Id + (p-2) * m^((p-4)/2) * g (x) g,   m = eps^2 + |g|^2.
/// At eps = 0 its eigenvalues are (p-1)|g|^(p-2) along g and |g|^(p-2)
/// across; with eps > 0 it is positive definite for every g.
inline Mat2 flux_jacobian(PExponent p, Regularization eps, Vec2 g) {
    double m = eps.eps * eps.eps + norm_sq(g);
    if (m == 0.0) {
        if (p.p < 2.0) {
            throw DegenerateJacobian("flux_jacobian: unbounded at g = 0 for p < 2, eps = 0");
        }
        if (p.p == 2.0) return {1.0, 0.0, 1.0};
        return {0.0, 0.0, 0.0};
    }
    double sigma = std::pow(m, 0.5 * p.p - 1.0);
    double tau = (p.p - 2.0) * sigma / m;  // (p-2) m^((p-4)/2)
    return {sigma + tau * g.x * g.x, tau * g.x * g.y, sigma + tau * g.y * g.y};
}

/// Regularized energy density ((eps^2 + |g|^2)^(p/2) - eps^p) / p.
/// Nonnegative, zero iff g = 0, and flux is its exact gradient in g.
inline double energy_density(PExponent p, Regularization eps, Vec2 g) {
    double e2 = eps.eps * eps.eps;
    double m = e2 + norm_sq(g);
    if (m == 0.0) return 0.0;
    double epow = e2 == 0.0 ? 0.0 : std::pow(e2, 0.5 * p.p);
    return (std::pow(m, 0.5 * p.p) - epow) / p.p;
}

}  // namespace plap
