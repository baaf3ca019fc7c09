#include "plap/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plap/kernels.hpp"

namespace plap {

namespace {

// Same 7-point degree-5 rule as integrate_field; the eigen load pairing has
// to use the identical quadrature for the Rayleigh quotient to be
// non-increasing at the discrete level.
struct Quad7 {
    double l[7][3];
    double w[7];
};

const Quad7& quad7() {
    static const Quad7 q = [] {
        Quad7 r{};
        const double s15 = std::sqrt(15.0);
        const double beta = (6.0 - s15) / 21.0, alpha = 1.0 - 2.0 * beta;
        const double delta = (6.0 + s15) / 21.0, gamma = 1.0 - 2.0 * delta;
        const double wb = (155.0 - s15) / 1200.0, wd = (155.0 + s15) / 1200.0;
        const double third = 1.0 / 3.0;
        const double L[7][3] = {{third, third, third}, {alpha, beta, beta},
                                {beta, alpha, beta},   {beta, beta, alpha},
                                {gamma, delta, delta}, {delta, gamma, delta},
                                {delta, delta, gamma}};
        const double W[7] = {9.0 / 40.0, wb, wb, wb, wd, wd, wd};
        for (int k = 0; k < 7; ++k) {
            for (int j = 0; j < 3; ++j) r.l[k][j] = L[k][j];
            r.w[k] = W[k];
        }
        return r;
    }();
    return q;
}

/// b_i = scale * integral |u|^(p-2) u phi_i dx by the 7-point rule,
/// restricted to free vertices.
std::vector<double> assemble_power_load(const TriMesh& mesh, const std::vector<double>& u,
                                        double p, double scale, const DirichletMask& mask) {
    const Quad7& q = quad7();
    std::vector<double> full(mesh.vertex_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const std::int32_t v[3] = {mesh.tri_ia[t], mesh.tri_ib[t], mesh.tri_ic[t]};
        const double uv[3] = {u[v[0]], u[v[1]], u[v[2]]};
        const double area = mesh.tri_area[t];
        for (int k = 0; k < 7; ++k) {
            double uq = q.l[k][0] * uv[0] + q.l[k][1] * uv[1] + q.l[k][2] * uv[2];
            double g = std::copysign(std::pow(std::abs(uq), p - 1.0), uq);
            double wq = area * q.w[k] * g;
            full[v[0]] += wq * q.l[k][0];
            full[v[1]] += wq * q.l[k][1];
            full[v[2]] += wq * q.l[k][2];
        }
    }
    std::vector<double> b(mask.free_count());
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] = scale * full[mask.free_vertices[i]];
    }
    return b;
}

double gradient_energy_p(const TriMesh& mesh, const std::vector<double>& u, double p,
                         AssemblyWorkspace& ws) {
    const std::size_t nt = mesh.triangle_count();
    ws.gx.resize(nt);
    ws.gy.resize(nt);
    ws.m.resize(nt);
    const auto& kn = kernels::active();
    kn.tri_gradients(nt, mesh.tri_ia.data(), mesh.tri_ib.data(), mesh.tri_ic.data(),
                     mesh.gbx[0].data(), mesh.gbx[1].data(), mesh.gbx[2].data(),
                     mesh.gby[0].data(), mesh.gby[1].data(), mesh.gby[2].data(), u.data(),
                     ws.gx.data(), ws.gy.data());
    kn.sq_norm_shift(0.0, ws.gx.data(), ws.gy.data(), ws.m.data(), nt);
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        acc += mesh.tri_area[t] * std::pow(ws.m[t], 0.5 * p);
    }
    return acc;
}

}  // namespace

EigenSettings default_eigen_settings(PExponent p) {
    EigenSettings s;
    s.inner = default_solver_settings(p);
    return s;
}

double rayleigh_quotient(const TriMesh& mesh, const NodalField& u, PExponent p) {
    check_field(mesh, u);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_flags[v] != VertexFlag::Interior && u.values[v] != 0.0) {
            throw ConfigError("rayleigh_quotient: field must vanish on the boundary");
        }
    }
    double den = integrate_field(mesh, u, p.p);
    if (!(den > std::numeric_limits<double>::min())) {
        throw ZeroField("rayleigh_quotient: |u|^p integral underflows");
    }
    AssemblyWorkspace ws;
    double num = gradient_energy_p(mesh, u.values, p.p, ws);
    return num / den;
}

EigenPair solve_first_eigenpair(const TriMesh& mesh, PExponent p, const EigenSettings& settings) {
    settings.inner.validate();

    // Positive starting cone: the torsion solution, normalized.
    TorsionSolution torsion = solve_torsion(mesh, p, settings.inner);
    NodalField u = torsion.field;
    double nrm = std::pow(integrate_field(mesh, u, p.p), 1.0 / p.p);
    for (double& x : u.values) x /= nrm;

    NewtonWork work(mesh);
    AssemblyWorkspace ws;
    const double final_eps = settings.inner.eps_schedule.back();

    EigenPair pair;
    pair.lambda1 = rayleigh_quotient(mesh, u, p);
    pair.lambda_trace.push_back(pair.lambda1);

    double sub_tol = std::max(settings.inner.tol, 1e-8);
    std::vector<double> prev(u.values.size());
    int outer = 0;
    for (; outer < settings.max_outer; ++outer) {
        std::vector<double> b =
            assemble_power_load(mesh, u.values, p.p, pair.lambda1, work.mask);
        prev = u.values;
        newton_solve(work, p, Regularization(final_eps), b, sub_tol, settings.inner,
                     u.values);
        nrm = std::pow(integrate_field(mesh, u, p.p), 1.0 / p.p);
        for (double& x : u.values) x /= nrm;

        double field_change = 0.0, field_max = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            field_change = std::max(field_change, std::abs(u.values[i] - prev[i]));
            field_max = std::max(field_max, std::abs(u.values[i]));
        }

        double lambda_new = rayleigh_quotient(mesh, u, p);
        if (!(lambda_new <= pair.lambda1 * (1.0 + 1e-12))) {
            throw Error("solve_first_eigenpair: Rayleigh quotient increased");
        }
        double rel = std::abs(lambda_new - pair.lambda1) / lambda_new;
        pair.lambda1 = lambda_new;
        pair.lambda_trace.push_back(lambda_new);

        if (rel <= settings.lambda_rtol && sub_tol <= settings.inner.tol &&
            field_change <= settings.field_rtol * field_max) {
            ++outer;
            break;
        }
        // Tighten the sub-solve geometrically as lambda stalls (down to the
        // floor; demanding much below inner.tol runs into the assembly
        // rounding floor on fine meshes).
        double floor = settings.subsolve_tol_floor > 0.0 ? settings.subsolve_tol_floor
                                                         : settings.inner.tol;
        if (rel <= 100.0 * settings.lambda_rtol) {
            sub_tol = std::max(0.1 * sub_tol, floor);
        }
    }
    if (outer >= settings.max_outer) {
        throw NonConvergence("solve_first_eigenpair: outer iteration budget exhausted",
                             pair.lambda1, u.values);
    }

    // Exact normalization and diagnostics.
    nrm = std::pow(integrate_field(mesh, u, p.p), 1.0 / p.p);
    for (double& x : u.values) x /= nrm;
    pair.field = u;
    pair.iterations = outer;
    pair.lambda1 = rayleigh_quotient(mesh, u, p);

    std::vector<double> b = assemble_power_load(mesh, u.values, p.p, pair.lambda1, work.mask);
    std::vector<double> r;
    assemble_residual_into(mesh, u.values, p, Regularization(final_eps), b, work.mask, ws, r);
    const auto& kn = kernels::active();
    double bn = std::sqrt(kn.dot(b.data(), b.data(), b.size()));
    pair.rq_residual = std::sqrt(kn.dot(r.data(), r.data(), r.size())) / (bn > 0.0 ? bn : 1.0);

    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_flags[v] == VertexFlag::Interior && !(u.values[v] > 0.0)) {
            throw Error("solve_first_eigenpair: interior positivity violated");
        }
    }
    return pair;
}

}  // namespace plap
