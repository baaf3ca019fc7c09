#pragma once

#include <vector>

#include "plap/fem.hpp"

namespace plap {

struct FluxSample {
    Vec2 midpoint;   ///< edge midpoint
    Vec2 normal;     ///< outward unit normal of the domain (exact circle geometry)
    double value;    ///< normal derivative of the field at the edge
    double length;   ///< edge (chord) length
};

struct BoundaryFlux {
    BoundaryTag tag = BoundaryTag::Inner;
    std::vector<FluxSample> samples;  ///< in boundary-edge order
};

/// One-sided normal derivative per boundary edge: the P1 gradient of the
/// unique adjacent triangle dotted with the exact-circle outward normal at
/// the edge midpoint (pointing into the hole on the inner boundary).
BoundaryFlux boundary_normal_derivative(const TriMesh& mesh, const NodalField& u,
                                        BoundaryTag tag);

/// Shape derivative of the torsional rigidity for the inner-ball
/// translation: midpoint-rule integral of |value|^p n1 over the hole rim.
double hadamard_torsion_derivative(const BoundaryFlux& flux, PExponent p);

/// Shape derivative of the first eigenvalue for the same perturbation:
/// -(p-1) times the midpoint-rule integral of |value|^p n1.
double hadamard_eigen_derivative(const BoundaryFlux& flux, PExponent p);

/// Translation field V = rho(x) e1 with a C^1 cubic blend: rho = 1 on
/// |x - s e1| <= r0 + 0.2 (r1-r0-s), rho = 0 on |x| >= r1 - 0.2 (r1-r0-s).
struct PerturbationField {
    double s = 0.0;
    double inner_radius = 0.0;  ///< rho == 1 inside this circle around (s, 0)
    double outer_radius = 0.0;  ///< rho == 0 outside this circle around 0
    bool zero = false;          ///< V identically zero (test hook)

    static PerturbationField translation(const AnnularDomain& domain);
    static PerturbationField zero_field();

    double rho(Vec2 x) const;
    Vec2 grad_rho(Vec2 x) const;
};

struct PucciSerrinResult {
    double residual = 0.0;  ///< |LHS - RHS|
    double scale = 0.0;     ///< max absolute value of the four terms
    double lhs = 0.0;       ///< boundary term
    double term_div = 0.0;  ///< volume: div V |grad u|^p / p
    double term_dv = 0.0;   ///< volume: <(DV)* grad u, |grad u|^(p-2) grad u>
    double term_load = 0.0; ///< volume: V . grad u f
};

/// Evaluates both sides of the Rellich-Pohozaev identity for the
/// p-Laplacian on a converged solution with constant load f = load_value.
PucciSerrinResult pucci_serrin_residual(const TriMesh& mesh, const NodalField& u, PExponent p,
                                        double load_value, const PerturbationField& V);

struct ReflectionReport {
    double min_gap = 0.0;             ///< min over sampled vertices of u(reflected) - u
    double violating_fraction = 0.0;  ///< fraction with gap < -1e-3 * max u
    std::size_t sampled = 0;
};

/// Moving-plane comparison: for every interior vertex strictly on the
/// {x1 > s} side, interpolates the field at the reflected point (which lies
/// inside the domain) and reports the worst gap.
ReflectionReport reflection_comparison(const TriMesh& mesh, const NodalField& u, double s);

struct MirrorPairReport {
    std::size_t pairs = 0;
    double min_margin = 0.0;  ///< min over pairs of |flux at mirror| - |flux here|
    double max_abs_flux = 0.0;
};

/// Strict-comparison check on the hole rim: for each inner edge on the
/// {x1 > s} side, the mirrored edge must carry strictly larger flux
/// magnitude. Requires the structured mesh with even n_theta.
MirrorPairReport mirrored_inner_flux_margin(const TriMesh& mesh, const BoundaryFlux& inner);

}  // namespace plap
