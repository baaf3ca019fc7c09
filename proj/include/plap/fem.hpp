#pragma once

#include <cstdint>
#include <vector>

#include "plap/geometry.hpp"
#include "plap/p_operator.hpp"

namespace plap {

/// Piecewise-linear scalar field: one value per mesh vertex.
struct NodalField {
    std::uint64_t mesh_id = 0;
    std::vector<double> values;
};

NodalField make_field(const TriMesh& mesh, double init = 0.0);

/// Throws if the field does not belong to the mesh or has a bad length.
void check_field(const TriMesh& mesh, const NodalField& u);

/// Zero Dirichlet data on every boundary vertex; free elsewhere.
struct DirichletMask {
    std::vector<std::uint8_t> constrained;   // per vertex
    std::vector<double> boundary_value;      // per vertex (0 for all problems here)
    std::vector<std::int32_t> free_index;    // vertex -> compact index or -1
    std::vector<std::int32_t> free_vertices; // compact index -> vertex

    std::size_t free_count() const { return free_vertices.size(); }
};

DirichletMask make_zero_dirichlet_mask(const TriMesh& mesh);

/// Compressed sparse rows over the free vertices; symmetric pattern with a
/// strictly positive diagonal.
struct SparseSPDMatrix {
    std::size_t n = 0;
    std::vector<std::int32_t> row_ptr;
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    void spmv(const double* x, double* y) const;
    std::vector<double> diagonal() const;
    /// Entry (i, j), or 0 when outside the pattern (test convenience).
    double entry(std::int32_t i, std::int32_t j) const;
};

/// Constant gradient of the linear interpolant on one triangle.
Vec2 p1_gradient(const TriMesh& mesh, const NodalField& u, std::size_t triangle_index);

/// Integral of |u|^power over the mesh, 7-point degree-5 quadrature per
/// triangle. Exact for power = 1 (and sign-definite u).
double integrate_field(const TriMesh& mesh, const NodalField& u, double power);

/// Scratch buffers reused across residual/Jacobian/energy evaluations.
struct AssemblyWorkspace {
    std::vector<double> gx, gy, m;
};

/// Load vector b_i = integral(load * phi_i) over free vertices (consistent
/// P1 mass applied to the nodal load).
std::vector<double> assemble_load_vector(const TriMesh& mesh, const NodalField& load,
                                         const DirichletMask& mask);

/// Residual r_i = integral(flux(grad u) . grad phi_i) - integral(load * phi_i)
/// over free vertices; the exact gradient of the discrete regularized energy.
std::vector<double> assemble_residual(const TriMesh& mesh, const NodalField& u,
                                      PExponent p, Regularization eps,
                                      const NodalField& load, const DirichletMask& mask);

/// Same as assemble_residual but with the load vector prebuilt.
void assemble_residual_into(const TriMesh& mesh, const std::vector<double>& u_values,
                            PExponent p, Regularization eps,
                            const std::vector<double>& load_vec, const DirichletMask& mask,
                            AssemblyWorkspace& ws, std::vector<double>& out);

/// Discrete regularized energy  sum_T |T| * dens(grad u) - <b, u_free>.
double discrete_energy(const TriMesh& mesh, const std::vector<double>& u_values,
                       PExponent p, Regularization eps,
                       const std::vector<double>& load_vec, const DirichletMask& mask,
                       AssemblyWorkspace& ws);

/// CSR pattern plus per-triangle scatter slots; build once per (mesh, mask),
/// reuse for every Jacobian assembly.
struct JacobianPattern {
    SparseSPDMatrix skeleton;           // values zeroed
    std::vector<std::int32_t> scatter;  // 9 per triangle; -1 = constrained pair
};

JacobianPattern build_jacobian_pattern(const TriMesh& mesh, const DirichletMask& mask);

/// Element-wise flux Jacobian contracted with P1 basis gradients; SPD on the
/// free vertices for eps > 0 (and for p >= 2 wherever gradients do not all
/// vanish). Throws DegenerateJacobian for p < 2 with eps = 0.
void assemble_jacobian_into(const TriMesh& mesh, const std::vector<double>& u_values,
                            PExponent p, Regularization eps,
                            const JacobianPattern& pattern, AssemblyWorkspace& ws,
                            SparseSPDMatrix& out);

SparseSPDMatrix assemble_jacobian(const TriMesh& mesh, const NodalField& u, PExponent p,
                                  Regularization eps, const DirichletMask& mask);

/// Jacobi-preconditioned conjugate gradients; relative residual <= tol.
/// max_iter = 0 means the default cap of 10 * dimension.
std::vector<double> solve_spd(const SparseSPDMatrix& matrix, const std::vector<double>& rhs,
                              double tol, std::size_t max_iter = 0);

/// Iterations used by the most recent solve_spd call on this thread.
std::size_t last_cg_iterations();

}  // namespace plap
