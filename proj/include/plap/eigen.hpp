#pragma once

#include <vector>

#include "plap/torsion.hpp"

namespace plap {

struct EigenSettings {
    SolverSettings inner;          ///< sub-solve controls
    double lambda_rtol = 1e-8;     ///< stop when |dlambda| <= rtol * lambda
    double field_rtol = 1e-7;      ///< ... and the iterate is stationary:
                                   ///< max|u_k+1 - u_k| <= field_rtol * max|u|
                                   ///< (lambda converges quadratically in the
                                   ///< field error, so it alone under-resolves
                                   ///< the eigenfunction)
    double subsolve_tol_floor = 0.0;  ///< 0 = clamp at inner.tol
    int max_outer = 300;
};

EigenSettings default_eigen_settings(PExponent p);

struct EigenPair {
    double lambda1 = 0.0;
    NodalField field;  ///< positive inside, zero on the boundary, ||.||_p = 1
    int iterations = 0;
    double rq_residual = 0.0;  ///< scaled residual of the eigen-equation at exit
    std::vector<double> lambda_trace;
};

/// Discrete Rayleigh quotient  integral |grad u|^p / integral |u|^p.
/// Invariant under scaling; throws ZeroField when the denominator vanishes.
double rayleigh_quotient(const TriMesh& mesh, const NodalField& u, PExponent p);

/// First Dirichlet eigenpair by nonlinear inverse power iteration: starting
/// from the normalized torsion solution, repeatedly solve
///   -Delta_p u = lambda_k |u_k|^(p-2) u_k
/// (quadrature-consistent load pairing), normalize, and update lambda by the
/// Rayleigh quotient. The lambda sequence is non-increasing.
EigenPair solve_first_eigenpair(const TriMesh& mesh, PExponent p, const EigenSettings& settings);

}  // namespace plap
