#include "plap/torsion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plap/kernels.hpp"

namespace plap {

void SolverSettings::validate() const {
    if (!(tol > 0.0)) throw ConfigError("SolverSettings: tol must be > 0");
    if (eps_schedule.empty()) throw ConfigError("SolverSettings: empty eps schedule");
    for (std::size_t i = 0; i + 1 < eps_schedule.size(); ++i) {
        if (!(eps_schedule[i] > eps_schedule[i + 1])) {
            throw ConfigError("SolverSettings: eps schedule must be strictly decreasing");
        }
    }
    if (!(eps_schedule.back() >= 0.0)) {
        throw ConfigError("SolverSettings: last eps must be >= 0");
    }
    if (max_newton_per_eps < 1) throw ConfigError("SolverSettings: max_newton_per_eps < 1");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw ConfigError("SolverSettings: armijo_c");
    if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
        throw ConfigError("SolverSettings: armijo_shrink");
    }
}

SolverSettings default_solver_settings(PExponent p) {
    SolverSettings s;
    for (int k = 2; k <= 8; ++k) s.eps_schedule.push_back(std::pow(10.0, -k));
    if (p.p >= 2.0) s.eps_schedule.push_back(0.0);
    return s;
}

NewtonWork::NewtonWork(const TriMesh& m)
    : mesh(&m), mask(make_zero_dirichlet_mask(m)), pattern(build_jacobian_pattern(m, mask)) {}

NewtonStats newton_solve(NewtonWork& work, PExponent p, Regularization eps,
                         const std::vector<double>& load_vec, double tol,
                         const SolverSettings& settings, std::vector<double>& u_values) {
    const TriMesh& mesh = *work.mesh;
    const DirichletMask& mask = work.mask;
    const std::size_t nfree = mask.free_count();
    const auto& kn = kernels::active();

    NewtonStats stats;
    double bnorm = std::sqrt(kn.dot(load_vec.data(), load_vec.data(), nfree));
    if (bnorm == 0.0) {
        for (std::size_t i = 0; i < nfree; ++i) u_values[mask.free_vertices[i]] = 0.0;
        return stats;
    }

    std::vector<double> r;
    assemble_residual_into(mesh, u_values, p, eps, load_vec, mask, work.ws, r);
    double res = std::sqrt(kn.dot(r.data(), r.data(), nfree)) / bnorm;
    double energy = discrete_energy(mesh, u_values, p, eps, load_vec, mask, work.ws);

    std::vector<double> trial(u_values.size());
    std::vector<double> rhs(nfree);
    for (int it = 0; it < settings.max_newton_per_eps; ++it) {
        if (res <= tol) {
            stats.scaled_residual = res;
            return stats;
        }
        assemble_jacobian_into(mesh, u_values, p, eps, work.pattern, work.ws, work.jac);
        for (std::size_t i = 0; i < nfree; ++i) rhs[i] = -r[i];
        double cg_tol = std::max(1e-4, std::min(0.1, 0.1 * res));
        std::vector<double> step = solve_spd(work.jac, rhs, cg_tol);
        stats.cg_iterations += last_cg_iterations();

        double dir = kn.dot(r.data(), step.data(), nfree);  // < 0 for a descent step

        // Near the minimizer the predicted decrease -dir drops below the
        // rounding noise of the energy sum; Armijo then rejects full Newton
        // steps that still contract the residual. Switch the acceptance
        // test to residual contraction in that regime.
        const double noise =
            64.0 * std::numeric_limits<double>::epsilon() * std::abs(energy);
        double t = 1.0;
        bool accepted = false;
        if (-dir <= noise) {
            std::vector<double> r_try(nfree);
            for (int bt = 0; bt <= settings.max_backtracks; ++bt) {
                trial = u_values;
                for (std::size_t i = 0; i < nfree; ++i) {
                    trial[mask.free_vertices[i]] += t * step[i];
                }
                assemble_residual_into(mesh, trial, p, eps, load_vec, mask, work.ws, r_try);
                double res_try = std::sqrt(kn.dot(r_try.data(), r_try.data(), nfree)) / bnorm;
                if (res_try < res) {
                    u_values.swap(trial);
                    r.swap(r_try);
                    res = res_try;
                    accepted = true;
                    break;
                }
                t *= settings.armijo_shrink;
            }
            if (!accepted) {
                throw NonConvergence("newton_solve: residual stalled at rounding floor", res,
                                     u_values);
            }
            energy = discrete_energy(mesh, u_values, p, eps, load_vec, mask, work.ws);
            ++stats.newton_iterations;
            continue;
        }

        double etrial = 0.0;
        for (int bt = 0; bt <= settings.max_backtracks; ++bt) {
            trial = u_values;
            for (std::size_t i = 0; i < nfree; ++i) {
                trial[mask.free_vertices[i]] += t * step[i];
            }
            etrial = discrete_energy(mesh, trial, p, eps, load_vec, mask, work.ws);
            if (etrial <= energy + settings.armijo_c * t * dir + noise / 4.0) {
                accepted = true;
                break;
            }
            t *= settings.armijo_shrink;
        }
        if (!accepted) {
            throw NonConvergence("newton_solve: backtracking exhausted", res, u_values);
        }
        if (!(etrial <= energy + 1e-12 * (std::abs(energy) + 1.0))) {
            throw Error("newton_solve: energy increased on an accepted step");
        }
        u_values.swap(trial);
        energy = etrial;
        ++stats.newton_iterations;
        assemble_residual_into(mesh, u_values, p, eps, load_vec, mask, work.ws, r);
        res = std::sqrt(kn.dot(r.data(), r.data(), nfree)) / bnorm;
    }
    if (res <= tol) {
        stats.scaled_residual = res;
        return stats;
    }
    throw NonConvergence("newton_solve: iteration budget exhausted", res, u_values);
}

TorsionSolution solve_torsion(const TriMesh& mesh, PExponent p, const SolverSettings& settings) {
    settings.validate();
    if (p.p < 2.0 && settings.eps_schedule.back() == 0.0) {
        throw DegenerateJacobian("solve_torsion: eps = 0 with p < 2");
    }

    NewtonWork work(mesh);
    NodalField ones = make_field(mesh, 1.0);
    std::vector<double> b = assemble_load_vector(mesh, ones, work.mask);

    // Initial iterate: one linear (p = 2) solve. Right sign and shape.
    std::vector<double> u(mesh.vertex_count(), 0.0);
    {
        SparseSPDMatrix stiffness;
        assemble_jacobian_into(mesh, u, PExponent(2.0), Regularization(0.0),
                               work.pattern, work.ws, stiffness);
        std::vector<double> u0 = solve_spd(stiffness, b, 1e-12);
        for (std::size_t i = 0; i < work.mask.free_count(); ++i) {
            u[work.mask.free_vertices[i]] = u0[i];
        }
    }

    TorsionSolution sol;
    for (double eps : settings.eps_schedule) {
        NewtonStats st = newton_solve(work, p, Regularization(eps), b, settings.tol,
                                      settings, u);
        sol.newton_iterations += st.newton_iterations;
        sol.cg_iterations += st.cg_iterations;
        sol.residual_norm = st.scaled_residual;
        sol.final_eps = eps;
    }

    sol.field = make_field(mesh, 0.0);
    sol.field.values = u;
    // Maximum-principle proxy: strictly positive at interior vertices.
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_flags[v] == VertexFlag::Interior && !(u[v] > 0.0)) {
            throw Error("solve_torsion: interior positivity violated");
        }
    }
    return sol;
}

std::pair<double, double> torsional_rigidity(const TriMesh& mesh, const TorsionSolution& sol,
                                             PExponent p) {
    check_field(mesh, sol.field);
    AssemblyWorkspace ws;
    const std::size_t nt = mesh.triangle_count();
    ws.gx.resize(nt);
    ws.gy.resize(nt);
    ws.m.resize(nt);
    const auto& kn = kernels::active();
    kn.tri_gradients(nt, mesh.tri_ia.data(), mesh.tri_ib.data(), mesh.tri_ic.data(),
                     mesh.gbx[0].data(), mesh.gbx[1].data(), mesh.gbx[2].data(),
                     mesh.gby[0].data(), mesh.gby[1].data(), mesh.gby[2].data(),
                     sol.field.values.data(), ws.gx.data(), ws.gy.data());
    kn.sq_norm_shift(0.0, ws.gx.data(), ws.gy.data(), ws.m.data(), nt);

    double e_grad = 0.0;
    double e_load = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        e_grad += mesh.tri_area[t] * std::pow(ws.m[t], 0.5 * p.p);
        double vsum = sol.field.values[mesh.tri_ia[t]] + sol.field.values[mesh.tri_ib[t]] +
                      sol.field.values[mesh.tri_ic[t]];
        e_load += mesh.tri_area[t] / 3.0 * vsum;
    }
    return {e_grad, e_load};
}

}  // namespace plap
