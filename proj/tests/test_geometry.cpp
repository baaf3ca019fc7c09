#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "plap/geometry.hpp"
#include "support/test_oracles.hpp"

using namespace plap;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("domain validation") {
    CHECK_NOTHROW((AnnularDomain{0.3, 1.0, 0.0}.validate()));
    CHECK_NOTHROW((AnnularDomain{0.3, 1.0, 0.699}.validate()));
    CHECK_THROWS_AS((AnnularDomain{0.0, 1.0, 0.0}.validate()), GeometryError);
    CHECK_THROWS_AS((AnnularDomain{1.0, 0.3, 0.0}.validate()), GeometryError);
    CHECK_THROWS_AS((AnnularDomain{0.3, 1.0, 0.7}.validate()), GeometryError);
    CHECK_THROWS_AS((AnnularDomain{0.3, 1.0, -0.1}.validate()), GeometryError);
}

TEST_CASE("structured mesh counts at 8x2") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.0}, 8, 2);
    CHECK(mesh.vertex_count() == 24);
    CHECK(mesh.triangle_count() == 32);
    int inner = 0, outer = 0;
    for (const auto& e : mesh.boundary_edges) {
        (e.tag == BoundaryTag::Inner ? inner : outer)++;
    }
    CHECK(inner == 8);
    CHECK(outer == 8);
}

TEST_CASE("offset mesh is valid and annular") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.5}, 64, 16);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        CHECK(mesh.signed_area(t) > 0.0);
    }
    CHECK(mesh.euler_characteristic() == 0);

    // Edge manifold structure: boundary edges once, interior edges twice.
    std::map<std::pair<int, int>, int> count;
    for (const auto& tr : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            int i = tr[k], j = tr[(k + 1) % 3];
            count[{std::min(i, j), std::max(i, j)}]++;
        }
    }
    std::set<std::pair<int, int>> boundary;
    for (const auto& e : mesh.boundary_edges) {
        boundary.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
    }
    for (const auto& [edge, c] : count) {
        if (boundary.count(edge)) {
            CHECK(c == 1);
        } else {
            CHECK(c == 2);
        }
    }
}

TEST_CASE("boundary edges reference their unique adjacent triangle") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.33}, 24, 6);
    for (const auto& e : mesh.boundary_edges) {
        const auto& tr = mesh.triangles[e.tri];
        int hits = 0;
        for (int k = 0; k < 3; ++k) {
            if (tr[k] == e.a || tr[k] == e.b) ++hits;
        }
        CHECK(hits == 2);
    }
}

TEST_CASE("boundary vertices sit on the exact circles") {
    AnnularDomain d{0.3, 1.0, 0.45};
    TriMesh mesh = build_annulus_mesh(d, 32, 8);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_flags[v] == VertexFlag::InnerBoundary) {
            CHECK(std::abs(norm(mesh.vertices[v] - d.hole_center()) - d.r0) <= 1e-12 * d.r1);
        } else if (mesh.vertex_flags[v] == VertexFlag::OuterBoundary) {
            CHECK(std::abs(norm(mesh.vertices[v]) - d.r1) <= 1e-12 * d.r1);
        }
    }
}

TEST_CASE("mesh area converges to the annulus area, order >= 1") {
    const double exact = kPi * (1.0 - 0.09);
    double prev_err = 0.0;
    int n = 32;
    for (int level = 0; level < 3; ++level) {
        TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.0}, 4 * n, n);
        double err = std::abs(mesh.total_area() - exact);
        if (level == 2) {
            CHECK(err / exact < 0.005);  // within 0.5% at 128x32
        }
        if (level > 0) CHECK(prev_err / err >= 2.0);
        prev_err = err;
        n *= 2;
    }
}

TEST_CASE("mapping stays injective across admissible offsets") {
    for (int k = 0; k <= 10; ++k) {
        double s = 0.95 * 0.7 * k / 10.0;
        TriMesh mesh = build_annulus_mesh({0.3, 1.0, std::min(s, 0.66)}, 48, 12);
        MeshQuality q = mesh.quality();
        CHECK(q.min_area > 0.0);
        CHECK(q.min_angle > 0.0);
    }
}

TEST_CASE("inner boundary length matches the inscribed polygon") {
    // Chord sum is exactly n * 2 r0 sin(pi/n); relative gap to 2 pi r0 is
    // O(1/n^2).
    for (int n : {32, 64, 128}) {
        TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.2}, n, 4);
        double len = 0.0;
        for (const auto& e : mesh.boundary_edges) {
            if (e.tag == BoundaryTag::Inner) len += norm(mesh.vertices[e.a] - mesh.vertices[e.b]);
        }
        double exact_polygon = n * 2.0 * 0.3 * std::sin(kPi / n);
        CHECK(std::abs(len - exact_polygon) < 1e-12);
        double bound = 1.5 * (kPi * kPi / 6.0) / (static_cast<double>(n) * n);
        CHECK(std::abs(len - 2.0 * kPi * 0.3) / (2.0 * kPi * 0.3) < bound);
    }
}

TEST_CASE("degenerate requests are rejected") {
    CHECK_THROWS_AS(build_annulus_mesh({0.3, 1.0, 0.68}, 32, 8), MeshQualityError);
    CHECK_THROWS_AS(build_annulus_mesh({0.3, 1.0, 0.0}, 4, 8), GeometryError);
    CHECK_THROWS_AS(build_annulus_mesh({0.3, 1.0, 0.0}, 32, 1), GeometryError);
}

TEST_CASE("reflection about the hyperplane") {
    CHECK(reflect_about_hyperplane({0.2, 0.7}, 0.2).x == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(reflect_about_hyperplane({0.2, 0.7}, 0.2).y == 0.7);
    Vec2 r = reflect_about_hyperplane({0.9, 0.1}, 0.2);
    CHECK(r.x == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(r.y == 0.1);

    auto gen = testsupport::rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        Vec2 x{dist(gen), dist(gen)};
        double s = dist(gen);
        Vec2 rr = reflect_about_hyperplane(reflect_about_hyperplane(x, s), s);
        CHECK(rr.x == doctest::Approx(x.x).epsilon(1e-14));
        CHECK(rr.y == x.y);
    }
}

TEST_CASE("mesh dump round trip") {
    TriMesh mesh = build_annulus_mesh({0.3, 1.0, 0.1}, 12, 3);
    std::ostringstream out;
    write_mesh_dump(mesh, out);
    std::istringstream in(out.str());
    std::size_t nv, nt, nbe;
    in >> nv >> nt >> nbe;
    CHECK(nv == mesh.vertex_count());
    CHECK(nt == mesh.triangle_count());
    CHECK(nbe == mesh.boundary_edges.size());
    for (std::size_t v = 0; v < nv; ++v) {
        double x, y;
        int flag;
        in >> x >> y >> flag;
        CHECK(x == mesh.vertices[v].x);  // %.17g round trips exactly
        CHECK(y == mesh.vertices[v].y);
        CHECK(flag == static_cast<int>(mesh.vertex_flags[v]));
    }
    for (std::size_t t = 0; t < nt; ++t) {
        int i, j, k;
        in >> i >> j >> k;
        CHECK(i == mesh.triangles[t][0]);
        CHECK(j == mesh.triangles[t][1]);
        CHECK(k == mesh.triangles[t][2]);
    }
    for (std::size_t e = 0; e < nbe; ++e) {
        int i, j;
        std::string tag;
        in >> i >> j >> tag;
        CHECK(i == mesh.boundary_edges[e].a);
        CHECK(j == mesh.boundary_edges[e].b);
        CHECK(tag == (mesh.boundary_edges[e].tag == BoundaryTag::Inner ? "inner" : "outer"));
    }
}
