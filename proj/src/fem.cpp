#include "plap/fem.hpp"

#include <algorithm>
#include <cmath>

#include "plap/kernels.hpp"

namespace plap {

namespace {

// 7-point degree-5 rule (barycentric points and area-weights).
struct QuadRule {
    double l1[7], l2[7], l3[7], w[7];
};

const QuadRule& quad7() {
    static const QuadRule rule = [] {
        QuadRule q{};
        const double s15 = std::sqrt(15.0);
        const double beta = (6.0 - s15) / 21.0, alpha = 1.0 - 2.0 * beta;
        const double delta = (6.0 + s15) / 21.0, gamma = 1.0 - 2.0 * delta;
        const double wb = (155.0 - s15) / 1200.0, wd = (155.0 + s15) / 1200.0;
        const double third = 1.0 / 3.0;
        double L1[7] = {third, alpha, beta, beta, gamma, delta, delta};
        double L2[7] = {third, beta, alpha, beta, delta, gamma, delta};
        double L3[7] = {third, beta, beta, alpha, delta, delta, gamma};
        double W[7] = {9.0 / 40.0, wb, wb, wb, wd, wd, wd};
        std::copy(L1, L1 + 7, q.l1);
        std::copy(L2, L2 + 7, q.l2);
        std::copy(L3, L3 + 7, q.l3);
        std::copy(W, W + 7, q.w);
        return q;
    }();
    return rule;
}

// m^q with fast paths for the exponents the solver actually hits.
inline double pow_fast(double m, double q) {
    if (q == 0.0) return 1.0;
    if (q == 1.0) return m;
    if (q == 0.5) return std::sqrt(m);
    if (q == 1.5) return m * std::sqrt(m);
    return std::pow(m, q);
}

thread_local std::size_t t_last_cg_iterations = 0;

}  // namespace

NodalField make_field(const TriMesh& mesh, double init) {
    NodalField f;
    f.mesh_id = mesh.mesh_id;
    f.values.assign(mesh.vertex_count(), init);
    return f;
}

void check_field(const TriMesh& mesh, const NodalField& u) {
    if (u.mesh_id != mesh.mesh_id) {
        throw Error("NodalField belongs to a different mesh");
    }
    if (u.values.size() != mesh.vertex_count()) {
        throw Error("NodalField has wrong length");
    }
}

DirichletMask make_zero_dirichlet_mask(const TriMesh& mesh) {
    DirichletMask mask;
    const std::size_t nv = mesh.vertex_count();
    mask.constrained.assign(nv, 0);
    mask.boundary_value.assign(nv, 0.0);
    mask.free_index.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (mesh.vertex_flags[v] != VertexFlag::Interior) mask.constrained[v] = 1;
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (!mask.constrained[v]) {
            mask.free_index[v] = static_cast<std::int32_t>(mask.free_vertices.size());
            mask.free_vertices.push_back(static_cast<std::int32_t>(v));
        }
    }
    return mask;
}

void SparseSPDMatrix::spmv(const double* x, double* y) const {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::int32_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            acc += values[k] * x[col_idx[k]];
        }
        y[i] = acc;
    }
}

std::vector<double> SparseSPDMatrix::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::int32_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            if (col_idx[k] == static_cast<std::int32_t>(i)) d[i] = values[k];
        }
    }
    return d;
}

double SparseSPDMatrix::entry(std::int32_t i, std::int32_t j) const {
    for (std::int32_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (col_idx[k] == j) return values[k];
    }
    return 0.0;
}

Vec2 p1_gradient(const TriMesh& mesh, const NodalField& u, std::size_t t) {
    check_field(mesh, u);
    if (t >= mesh.triangle_count()) throw Error("p1_gradient: triangle index out of range");
    const double ua = u.values[mesh.tri_ia[t]];
    const double ub = u.values[mesh.tri_ib[t]];
    const double uc = u.values[mesh.tri_ic[t]];
    double gx = (mesh.gbx[0][t] * ua + mesh.gbx[1][t] * ub) + mesh.gbx[2][t] * uc;
    double gy = (mesh.gby[0][t] * ua + mesh.gby[1][t] * ub) + mesh.gby[2][t] * uc;
    return {gx, gy};
}

double integrate_field(const TriMesh& mesh, const NodalField& u, double power) {
    check_field(mesh, u);
    if (!(power >= 1.0)) throw ConfigError("integrate_field: power must be >= 1");
    const QuadRule& q = quad7();
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double ua = u.values[mesh.tri_ia[t]];
        const double ub = u.values[mesh.tri_ib[t]];
        const double uc = u.values[mesh.tri_ic[t]];
        double acc = 0.0;
        for (int k = 0; k < 7; ++k) {
            double val = q.l1[k] * ua + q.l2[k] * ub + q.l3[k] * uc;
            acc += q.w[k] * std::pow(std::abs(val), power);
        }
        total += mesh.tri_area[t] * acc;
    }
    return total;
}

std::vector<double> assemble_load_vector(const TriMesh& mesh, const NodalField& load,
                                         const DirichletMask& mask) {
    check_field(mesh, load);
    std::vector<double> full(mesh.vertex_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const std::int32_t ia = mesh.tri_ia[t], ib = mesh.tri_ib[t], ic = mesh.tri_ic[t];
        const double la = load.values[ia], lb = load.values[ib], lc = load.values[ic];
        const double w = mesh.tri_area[t] / 12.0;
        full[ia] += w * (2.0 * la + lb + lc);
        full[ib] += w * (la + 2.0 * lb + lc);
        full[ic] += w * (la + lb + 2.0 * lc);
    }
    std::vector<double> b(mask.free_count());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = full[mask.free_vertices[i]];
    return b;
}

namespace {

// Batched per-triangle gradients and shifted squared norms.
void eval_gradients(const TriMesh& mesh, const std::vector<double>& u, double eps,
                    AssemblyWorkspace& ws) {
    const std::size_t nt = mesh.triangle_count();
    ws.gx.resize(nt);
    ws.gy.resize(nt);
    ws.m.resize(nt);
    const auto& k = kernels::active();
    k.tri_gradients(nt, mesh.tri_ia.data(), mesh.tri_ib.data(), mesh.tri_ic.data(),
                    mesh.gbx[0].data(), mesh.gbx[1].data(), mesh.gbx[2].data(),
                    mesh.gby[0].data(), mesh.gby[1].data(), mesh.gby[2].data(),
                    u.data(), ws.gx.data(), ws.gy.data());
    k.sq_norm_shift(eps * eps, ws.gx.data(), ws.gy.data(), ws.m.data(), nt);
}

}  // namespace

void assemble_residual_into(const TriMesh& mesh, const std::vector<double>& u_values,
                            PExponent p, Regularization eps,
                            const std::vector<double>& load_vec, const DirichletMask& mask,
                            AssemblyWorkspace& ws, std::vector<double>& out) {
    const std::size_t nt = mesh.triangle_count();
    eval_gradients(mesh, u_values, eps.eps, ws);

    std::vector<double> full(mesh.vertex_count(), 0.0);
    const double q = 0.5 * p.p - 1.0;
    for (std::size_t t = 0; t < nt; ++t) {
        double m = ws.m[t];
        if (m == 0.0) continue;  // flux(0) = 0
        double sigma = pow_fast(m, q) * mesh.tri_area[t];
        double fx = sigma * ws.gx[t], fy = sigma * ws.gy[t];
        full[mesh.tri_ia[t]] += fx * mesh.gbx[0][t] + fy * mesh.gby[0][t];
        full[mesh.tri_ib[t]] += fx * mesh.gbx[1][t] + fy * mesh.gby[1][t];
        full[mesh.tri_ic[t]] += fx * mesh.gbx[2][t] + fy * mesh.gby[2][t];
    }
    out.resize(mask.free_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = full[mask.free_vertices[i]] - load_vec[i];
    }
}

std::vector<double> assemble_residual(const TriMesh& mesh, const NodalField& u,
                                      PExponent p, Regularization eps,
                                      const NodalField& load, const DirichletMask& mask) {
    check_field(mesh, u);
    std::vector<double> b = assemble_load_vector(mesh, load, mask);
    AssemblyWorkspace ws;
    std::vector<double> r;
    assemble_residual_into(mesh, u.values, p, eps, b, mask, ws, r);
    return r;
}

double discrete_energy(const TriMesh& mesh, const std::vector<double>& u_values,
                       PExponent p, Regularization eps,
                       const std::vector<double>& load_vec, const DirichletMask& mask,
                       AssemblyWorkspace& ws) {
    const std::size_t nt = mesh.triangle_count();
    eval_gradients(mesh, u_values, eps.eps, ws);
    const double e2 = eps.eps * eps.eps;
    const double epow = e2 == 0.0 ? 0.0 : pow_fast(e2, 0.5 * p.p);
    double energy = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        energy += mesh.tri_area[t] * (pow_fast(ws.m[t], 0.5 * p.p) - epow);
    }
    energy /= p.p;
    for (std::size_t i = 0; i < mask.free_count(); ++i) {
        energy -= load_vec[i] * u_values[mask.free_vertices[i]];
    }
    return energy;
}

JacobianPattern build_jacobian_pattern(const TriMesh& mesh, const DirichletMask& mask) {
    const std::size_t nfree = mask.free_count();
    // Collect column sets per free row from triangle connectivity.
    std::vector<std::vector<std::int32_t>> cols(nfree);
    auto add = [&](std::int32_t vi, std::int32_t vj) {
        std::int32_t i = mask.free_index[vi];
        std::int32_t j = mask.free_index[vj];
        if (i < 0 || j < 0) return;
        cols[i].push_back(j);
    };
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const std::int32_t v[3] = {mesh.tri_ia[t], mesh.tri_ib[t], mesh.tri_ic[t]};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) add(v[a], v[b]);
    }
    JacobianPattern pat;
    pat.skeleton.n = nfree;
    pat.skeleton.row_ptr.assign(nfree + 1, 0);
    for (std::size_t i = 0; i < nfree; ++i) {
        auto& c = cols[i];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        pat.skeleton.row_ptr[i + 1] = pat.skeleton.row_ptr[i] + static_cast<std::int32_t>(c.size());
    }
    pat.skeleton.col_idx.reserve(pat.skeleton.row_ptr[nfree]);
    for (auto& c : cols) pat.skeleton.col_idx.insert(pat.skeleton.col_idx.end(), c.begin(), c.end());
    pat.skeleton.values.assign(pat.skeleton.col_idx.size(), 0.0);

    // Per-triangle scatter slots into the CSR value array.
    auto slot = [&](std::int32_t i, std::int32_t j) -> std::int32_t {
        auto begin = pat.skeleton.col_idx.begin() + pat.skeleton.row_ptr[i];
        auto end = pat.skeleton.col_idx.begin() + pat.skeleton.row_ptr[i + 1];
        auto it = std::lower_bound(begin, end, j);
        return static_cast<std::int32_t>(it - pat.skeleton.col_idx.begin());
    };
    pat.scatter.assign(9 * mesh.triangle_count(), -1);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const std::int32_t v[3] = {mesh.tri_ia[t], mesh.tri_ib[t], mesh.tri_ic[t]};
        for (int a = 0; a < 3; ++a) {
            std::int32_t i = mask.free_index[v[a]];
            if (i < 0) continue;
            for (int b = 0; b < 3; ++b) {
                std::int32_t j = mask.free_index[v[b]];
                if (j < 0) continue;
                pat.scatter[9 * t + 3 * a + b] = slot(i, j);
            }
        }
    }
    return pat;
}

void assemble_jacobian_into(const TriMesh& mesh, const std::vector<double>& u_values,
                            PExponent p, Regularization eps,
                            const JacobianPattern& pattern, AssemblyWorkspace& ws,
                            SparseSPDMatrix& out) {
    if (p.p < 2.0 && eps.eps == 0.0) {
        throw DegenerateJacobian("assemble_jacobian: p < 2 requires eps > 0");
    }
    const std::size_t nt = mesh.triangle_count();
    eval_gradients(mesh, u_values, eps.eps, ws);

    out.n = pattern.skeleton.n;
    out.row_ptr = pattern.skeleton.row_ptr;
    out.col_idx = pattern.skeleton.col_idx;
    out.values.assign(pattern.skeleton.values.size(), 0.0);

    const double q = 0.5 * p.p - 1.0;
    for (std::size_t t = 0; t < nt; ++t) {
        double m = ws.m[t];
        double sigma, tau;
        if (m == 0.0) {
            // p >= 2 here: the limit block is Id for p = 2 and 0 for p > 2.
            sigma = (p.p == 2.0) ? 1.0 : 0.0;
            tau = 0.0;
        } else {
            sigma = pow_fast(m, q);
            tau = (p.p - 2.0) * sigma / m;
        }
        const double area = mesh.tri_area[t];
        const double gx = ws.gx[t], gy = ws.gy[t];
        double k[3][3];
        for (int a = 0; a < 3; ++a) {
            const double bax = mesh.gbx[a][t], bay = mesh.gby[a][t];
            const double ga = gx * bax + gy * bay;
            for (int b = a; b < 3; ++b) {
                const double bbx = mesh.gbx[b][t], bby = mesh.gby[b][t];
                const double gb = gx * bbx + gy * bby;
                k[a][b] = area * (sigma * (bax * bbx + bay * bby) + tau * ga * gb);
            }
        }
        k[1][0] = k[0][1];
        k[2][0] = k[0][2];
        k[2][1] = k[1][2];
        const std::int32_t* slots = &pattern.scatter[9 * t];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                std::int32_t s = slots[3 * a + b];
                if (s >= 0) out.values[s] += k[a][b];
            }
        }
    }
}

SparseSPDMatrix assemble_jacobian(const TriMesh& mesh, const NodalField& u, PExponent p,
                                  Regularization eps, const DirichletMask& mask) {
    check_field(mesh, u);
    JacobianPattern pattern = build_jacobian_pattern(mesh, mask);
    AssemblyWorkspace ws;
    SparseSPDMatrix out;
    assemble_jacobian_into(mesh, u.values, p, eps, pattern, ws, out);
    return out;
}

std::vector<double> solve_spd(const SparseSPDMatrix& matrix, const std::vector<double>& rhs,
                              double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) throw ConfigError("solve_spd: tol must be > 0");
    if (rhs.size() != matrix.n) throw ConfigError("solve_spd: size mismatch");
    const std::size_t n = matrix.n;
    if (max_iter == 0) max_iter = 10 * n;
    const auto& kn = kernels::active();

    std::vector<double> x(n, 0.0);
    t_last_cg_iterations = 0;
    double bnorm = std::sqrt(kn.dot(rhs.data(), rhs.data(), n));
    if (bnorm == 0.0) return x;

    std::vector<double> invdiag = matrix.diagonal();
    for (double& d : invdiag) {
        if (!(d > 0.0)) throw LinearSolveFailure("solve_spd: nonpositive diagonal");
        d = 1.0 / d;
    }

    std::vector<double> r = rhs, z(n), pvec(n), q(n);
    kn.hadamard(r.data(), invdiag.data(), z.data(), n);
    pvec = z;
    double rz = kn.dot(r.data(), z.data(), n);
    const double target = tol * bnorm;

    for (std::size_t it = 1; it <= max_iter; ++it) {
        matrix.spmv(pvec.data(), q.data());
        double pq = kn.dot(pvec.data(), q.data(), n);
        if (!(pq > 0.0)) throw LinearSolveFailure("solve_spd: matrix not positive definite");
        double alpha = rz / pq;
        kn.axpy(alpha, pvec.data(), x.data(), n);
        kn.axpy(-alpha, q.data(), r.data(), n);
        t_last_cg_iterations = it;
        double rnorm = std::sqrt(kn.dot(r.data(), r.data(), n));
        if (rnorm <= target) return x;
        kn.hadamard(r.data(), invdiag.data(), z.data(), n);
        double rz_new = kn.dot(r.data(), z.data(), n);
        double beta = rz_new / rz;
        kn.xpby(z.data(), beta, pvec.data(), n);
        rz = rz_new;
    }
    throw LinearSolveFailure("solve_spd: iteration cap exceeded");
}

std::size_t last_cg_iterations() { return t_last_cg_iterations; }

}  // namespace plap
