#pragma once

#include <vector>

#include "plap/p_operator.hpp"

namespace plap {

/// One-dimensional radial solution on [r_inner, r_outer] in dimension N.
/// Ground truth for the concentric (s = 0) configurations.
struct RadialProfile {
    int dimension = 2;
    std::vector<double> r_grid;   ///< increasing radii
    std::vector<double> values;   ///< field values at the radii
    double E = 0.0;               ///< integral of the field over the N-d domain
};

/// Value of the profile at radius r (linear interpolation on the grid).
double profile_value(const RadialProfile& profile, double r);

/// Closed-form torsion profile of the ball B(0, R):
///   y(r) = ((p-1)/p) N^(-1/(p-1)) (R^(p/(p-1)) - r^(p/(p-1))).
/// The construction verifies the radial flux identity
/// r^(N-1)|y'|^(p-2)y' = -r^N/N at every grid point (residual <= 1e-8).
RadialProfile ball_torsion_profile(PExponent p, int N, double R, int n_grid);

/// Semianalytic torsion profile of the concentric annulus: integrates
///   y'(r) = sign(c - r) (|c^N - r^N| / (N r^(N-1)))^(1/(p-1))
/// outward from y(r0) = 0, with the free radius c (where y' = 0) found by
/// bisection on y(r1) = 0 to 1e-12*(r1-r0). Composite per-cell Simpson,
/// n_grid >= 1000 cells.
RadialProfile annulus_torsion_profile(PExponent p, int N, double r0, double r1, int n_grid);

/// Gradient-form rigidity of a torsion profile: integral of |y'|^p over the
/// domain (equals profile.E up to quadrature error).
double profile_gradient_energy(const RadialProfile& profile, PExponent p);

struct RadialEigenResult {
    double lambda1 = 0.0;
    RadialProfile profile;  ///< positive, normalized: integral |y1|^p = 1
    int iterations = 0;
};

/// First Dirichlet eigenpair of the concentric annulus by nonlinear inverse
/// power iteration on a uniform radial grid (three-point conservative
/// discretization of (r^(N-1)|y'|^(p-2)y')' with r^(N-1) mass weights).
/// r0 = 0 is accepted and means the full ball: the center node is free
/// (natural condition), Dirichlet only at r1.
RadialEigenResult radial_eigen(PExponent p, int N, double r0, double r1, int n_grid);

/// First positive zero of the Bessel function J0, by bisection.
double bessel_j0_first_zero();

/// First positive root k of J0(k r0) Y0(k r1) - J0(k r1) Y0(k r0); the p=2
/// annulus eigenvalue is k^2.
double annulus_cross_product_root(double r0, double r1);

}  // namespace plap
