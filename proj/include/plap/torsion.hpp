#pragma once

#include <utility>
#include <vector>

#include "plap/fem.hpp"

namespace plap {

/// Damped-Newton / continuation controls shared by the nonlinear solvers.
struct SolverSettings {
    double tol = 1e-10;                ///< residual norm scaled by the load norm
    std::vector<double> eps_schedule;  ///< strictly decreasing, last entry >= 0
    int max_newton_per_eps = 60;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    int max_backtracks = 30;

    void validate() const;
};

/// Default continuation schedule {1e-2, 1e-3, ..., 1e-8}, with a final
/// eps = 0 polish stage when p >= 2 (the Jacobian stays bounded there).
SolverSettings default_solver_settings(PExponent p);

struct TorsionSolution {
    NodalField field;          ///< y: zero on the boundary, positive inside
    double final_eps = 0.0;
    int newton_iterations = 0;
    double residual_norm = 0.0;  ///< scaled residual at exit
    std::size_t cg_iterations = 0;
};

/// Solves the p-torsion problem (unit load, zero Dirichlet data) by damped
/// Newton with eps-continuation, warm-started from the p = 2 solution.
/// Energy decreases across all accepted steps of each stage.
TorsionSolution solve_torsion(const TriMesh& mesh, PExponent p, const SolverSettings& settings);

/// (E_grad, E_load): the gradient form integral |grad y|^p (exact per
/// triangle) and the load form integral y (exact linear quadrature). They
/// agree to solver tolerance at eps -> 0.
std::pair<double, double> torsional_rigidity(const TriMesh& mesh, const TorsionSolution& sol,
                                             PExponent p);

// --- internals shared with the eigenvalue solver ---

/// Per-mesh context for repeated Newton solves.
struct NewtonWork {
    const TriMesh* mesh = nullptr;
    DirichletMask mask;
    JacobianPattern pattern;
    AssemblyWorkspace ws;
    SparseSPDMatrix jac;

    explicit NewtonWork(const TriMesh& m);
};

struct NewtonStats {
    int newton_iterations = 0;
    std::size_t cg_iterations = 0;
    double scaled_residual = 0.0;
};

/// Minimizes the regularized discrete energy at fixed eps; u_values is the
/// full nodal vector (Dirichlet entries already set) and is updated in
/// place. Throws NonConvergence when the budget runs out.
NewtonStats newton_solve(NewtonWork& work, PExponent p, Regularization eps,
                         const std::vector<double>& load_vec, double tol,
                         const SolverSettings& settings, std::vector<double>& u_values);

}  // namespace plap
