#include <doctest.h>

#include <cmath>

#include "plap/radial.hpp"
#include "plap/torsion.hpp"
#include "support/test_oracles.hpp"

using namespace plap;
namespace ts = testsupport;

namespace {

TorsionSolution solve(const TriMesh& mesh, double p) {
    PExponent pe{p};
    return solve_torsion(mesh, pe, default_solver_settings(pe));
}

}  // namespace

TEST_CASE("settings validation") {
    SolverSettings s;
    CHECK_THROWS_AS(s.validate(), ConfigError);  // empty schedule
    s.eps_schedule = {1e-2, 1e-2};
    CHECK_THROWS_AS(s.validate(), ConfigError);  // not strictly decreasing
    s.eps_schedule = {1e-2, 1e-4};
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_AS(solve_torsion(build_annulus_mesh({0.3, 1.0, 0.0}, 8, 2), PExponent{1.5},
                                  [] {
                                      SolverSettings bad;
                                      bad.eps_schedule = {1e-2, 0.0};
                                      return bad;
                                  }()),
                    DegenerateJacobian);
}

TEST_CASE("p = 2 concentric matches the closed-form profile and rigidity") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.0}, 128, 48);
    TorsionSolution sol = solve(mesh, 2.0);

    const double a = (1.0 - 0.09) / (4.0 * std::log(1.0 / 0.3));
    const double b = 0.09 / 4.0 - a * std::log(0.3);
    double linf = 0.0, umax = 0.0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        double r = norm(mesh.vertices[v]);
        double exact = -r * r / 4.0 + a * std::log(r) + b;
        linf = std::max(linf, std::abs(sol.field.values[v] - exact));
        umax = std::max(umax, std::abs(exact));
    }
    CHECK(linf <= 0.01 * umax);

    auto [eg, el] = torsional_rigidity(mesh, sol, PExponent{2.0});
    CHECK(el == doctest::Approx(ts::kEAnnulusP2).epsilon(0.01));
    CHECK(std::abs(eg - el) / el <= 1e-4);
}

TEST_CASE("p = 3 concentric rigidity matches the radial oracle within 1%") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.0}, 128, 48);
    TorsionSolution sol = solve(mesh, 3.0);
    auto [eg, el] = torsional_rigidity(mesh, sol, PExponent{3.0});
    CHECK(el == doctest::Approx(ts::kEAnnulusP3).epsilon(0.01));
    CHECK(eg == doctest::Approx(ts::kEAnnulusP3).epsilon(0.01));
}

TEST_CASE("solution is zero on the boundary and positive inside") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.35}, 48, 16);
    for (double p : {1.5, 2.0, 3.0}) {
        TorsionSolution sol = solve(mesh, p);
        double min_interior = 1e300;
        for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
            if (mesh.vertex_flags[v] == VertexFlag::Interior) {
                min_interior = std::min(min_interior, sol.field.values[v]);
            } else {
                CHECK(sol.field.values[v] == 0.0);
            }
        }
        CHECK(min_interior > 0.0);
        CHECK(sol.residual_norm <= 1e-10);
    }
}

TEST_CASE("rigidity converges under refinement with order >= 1") {
    for (double p : {1.5, 2.0, 3.0}) {
        double E[3];
        int nt = 32, nl = 12;
        for (int level = 0; level < 3; ++level) {
            TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.25}, nt << level, nl << level);
            TorsionSolution sol = solve(mesh, p);
            E[level] = torsional_rigidity(mesh, sol, PExponent{p}).second;
        }
        double d1 = std::abs(E[1] - E[0]);
        double d2 = std::abs(E[2] - E[1]);
        CHECK(d1 / d2 >= 2.0);
    }
}

TEST_CASE("energy identity holds at eps -> 0 for p >= 2 and eps = 1e-8 for p < 2") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.4}, 64, 24);
    for (double p : {2.0, 3.0}) {
        TorsionSolution sol = solve(mesh, p);
        CHECK(sol.final_eps == 0.0);
        auto [eg, el] = torsional_rigidity(mesh, sol, PExponent{p});
        CHECK(std::abs(eg - el) / el <= 1e-4);
    }
    TorsionSolution sol = solve(mesh, 1.5);
    CHECK(sol.final_eps == 1e-8);
    auto [eg, el] = torsional_rigidity(mesh, sol, PExponent{1.5});
    CHECK(std::abs(eg - el) / el <= 1e-3);
}

TEST_CASE("mirroring the mesh through x2 -> -x2 leaves E unchanged") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.3}, 48, 16);
    TriMesh mirrored = ts::mirror_mesh_x2(mesh);
    for (double p : {2.0, 3.0}) {
        double e1 = torsional_rigidity(mesh, solve(mesh, p), PExponent{p}).second;
        double e2 = torsional_rigidity(mirrored, solve(mirrored, p), PExponent{p}).second;
        CHECK(std::abs(e1 - e2) / e1 <= 1e-12);
    }
}

TEST_CASE("unit-load rigidity against the ball sanity bound") {
    // E(annulus) < E(ball): removing material reduces rigidity. FEM side.
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.0}, 64, 24);
    TorsionSolution sol = solve(mesh, 2.0);
    auto [eg, el] = torsional_rigidity(mesh, sol, PExponent{2.0});
    CHECK(el < ts::kEBallP2);
    CHECK(eg < ts::kEBallP2);
}
