#include "plap/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

namespace plap {

namespace {

std::atomic<std::uint64_t> g_next_mesh_id{1};

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void AnnularDomain::validate() const {
    if (!(r0 > 0.0) || !std::isfinite(r0) || !std::isfinite(r1) || !std::isfinite(s)) {
        throw GeometryError("AnnularDomain: radii/offset must be finite, r0 > 0");
    }
    if (!(r0 < r1)) {
        throw GeometryError("AnnularDomain: need r0 < r1");
    }
    if (!(s >= 0.0) || !(s < r1 - r0)) {
        throw GeometryError("AnnularDomain: need 0 <= s < r1 - r0");
    }
}

double TriMesh::signed_area(std::size_t t) const {
    const auto& tr = triangles[t];
    Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
    return 0.5 * cross(b - a, c - a);
}

double TriMesh::total_area() const {
    double sum = 0.0;
    for (double a : tri_area) sum += a;
    return sum;
}

void TriMesh::finalize_geometry() {
    const std::size_t nt = triangles.size();
    tri_area.resize(nt);
    for (int k = 0; k < 3; ++k) {
        gbx[k].resize(nt);
        gby[k].resize(nt);
    }
    tri_ia.resize(nt);
    tri_ib.resize(nt);
    tri_ic.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto& tr = triangles[t];
        Vec2 a = vertices[tr[0]], b = vertices[tr[1]], c = vertices[tr[2]];
        double area2 = cross(b - a, c - a);
        if (!(area2 > 0.0)) {
            throw MeshQualityError("triangle " + std::to_string(t) +
                                   " has non-positive area");
        }
        tri_area[t] = 0.5 * area2;
        // grad(phi_a) = rot90(c - b) / (2A), cyclically.
        gbx[0][t] = (b.y - c.y) / area2;
        gby[0][t] = (c.x - b.x) / area2;
        gbx[1][t] = (c.y - a.y) / area2;
        gby[1][t] = (a.x - c.x) / area2;
        gbx[2][t] = (a.y - b.y) / area2;
        gby[2][t] = (b.x - a.x) / area2;
        tri_ia[t] = tr[0];
        tri_ib[t] = tr[1];
        tri_ic[t] = tr[2];
    }
}

MeshQuality TriMesh::quality() const {
    MeshQuality q;
    q.min_angle = kPi;
    q.min_area = std::numeric_limits<double>::max();
    q.max_aspect_ratio = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tr = triangles[t];
        Vec2 v[3] = {vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]};
        double area = tri_area.empty() ? signed_area(t) : tri_area[t];
        q.min_area = std::min(q.min_area, area);
        double lmax = 0.0;
        for (int k = 0; k < 3; ++k) {
            Vec2 e1 = v[(k + 1) % 3] - v[k];
            Vec2 e2 = v[(k + 2) % 3] - v[k];
            double ang = std::acos(std::clamp(
                dot(e1, e2) / (norm(e1) * norm(e2)), -1.0, 1.0));
            q.min_angle = std::min(q.min_angle, ang);
            lmax = std::max(lmax, norm(e1));
        }
        // shortest altitude = 2A / longest edge
        q.max_aspect_ratio = std::max(q.max_aspect_ratio, lmax * lmax / (2.0 * area));
    }
    return q;
}

int TriMesh::euler_characteristic() const {
    std::map<std::pair<std::int32_t, std::int32_t>, int> edges;
    for (const auto& tr : triangles) {
        for (int k = 0; k < 3; ++k) {
            std::int32_t i = tr[k], j = tr[(k + 1) % 3];
            edges[{std::min(i, j), std::max(i, j)}]++;
        }
    }
    return static_cast<int>(vertices.size()) - static_cast<int>(edges.size()) +
           static_cast<int>(triangles.size());
}

TriMesh build_annulus_mesh(const AnnularDomain& domain, int n_theta, int n_layers) {
    domain.validate();
    if (n_theta < 8 || n_layers < 2) {
        throw GeometryError("build_annulus_mesh: need n_theta >= 8, n_layers >= 2");
    }
    // Offsets close to r1 - r0 squeeze the gap into sliver elements.
    if (domain.s > 0.95 * (domain.r1 - domain.r0)) {
        throw MeshQualityError("offset exceeds 0.95*(r1 - r0); mesh would degenerate");
    }

    TriMesh mesh;
    mesh.domain = domain;
    mesh.n_theta = n_theta;
    mesh.n_layers = n_layers;
    mesh.mesh_id = g_next_mesh_id.fetch_add(1);

    const int nv = n_theta * (n_layers + 1);
    mesh.vertices.reserve(nv);
    mesh.vertex_flags.assign(nv, VertexFlag::Interior);

    const Vec2 c = domain.hole_center();
    for (int j = 0; j <= n_layers; ++j) {
        double t = static_cast<double>(j) / n_layers;
        for (int i = 0; i < n_theta; ++i) {
            double theta = 2.0 * kPi * i / n_theta;
            Vec2 dir{std::cos(theta), std::sin(theta)};
            Vec2 inner = c + domain.r0 * dir;
            Vec2 outer = domain.r1 * dir;
            mesh.vertices.push_back((1.0 - t) * inner + t * outer);
        }
    }
    for (int i = 0; i < n_theta; ++i) {
        mesh.vertex_flags[i] = VertexFlag::InnerBoundary;
        mesh.vertex_flags[n_layers * n_theta + i] = VertexFlag::OuterBoundary;
    }

    auto vid = [n_theta](int i, int j) { return j * n_theta + (i % n_theta); };

    mesh.triangles.reserve(2 * static_cast<std::size_t>(n_theta) * n_layers);
    // Quad (a, b, c2, d): a,b on layer j at angles i, i+1; c2,d on layer j+1.
    // CCW traversal is a -> d -> c2 -> b; split along the shorter diagonal.
    std::vector<std::int32_t> inner_edge_tri(n_theta, -1);
    std::vector<std::int32_t> outer_edge_tri(n_theta, -1);
    for (int j = 0; j < n_layers; ++j) {
        for (int i = 0; i < n_theta; ++i) {
            std::int32_t a = vid(i, j);
            std::int32_t b = vid(i + 1, j);
            std::int32_t c2 = vid(i + 1, j + 1);
            std::int32_t d = vid(i, j + 1);
            double diag_ac = norm_sq(mesh.vertices[a] - mesh.vertices[c2]);
            double diag_bd = norm_sq(mesh.vertices[b] - mesh.vertices[d]);
            // Shorter diagonal bounds the aspect ratio on the squeezed side.
            // Near-ties (all quads at s = 0) alternate by column parity,
            // which keeps the triangulation mirror-symmetric about both
            // axes when n_theta is a multiple of 4.
            bool use_ac;
            if (std::abs(diag_ac - diag_bd) <= 1e-12 * (diag_ac + diag_bd)) {
                use_ac = (i % 2 == 0);
            } else {
                use_ac = diag_ac < diag_bd;
            }
            std::int32_t tri_bottom, tri_top;
            if (use_ac) {
                mesh.triangles.push_back({a, c2, b});
                tri_bottom = static_cast<std::int32_t>(mesh.triangles.size() - 1);
                mesh.triangles.push_back({a, d, c2});
                tri_top = static_cast<std::int32_t>(mesh.triangles.size() - 1);
            } else {
                mesh.triangles.push_back({a, d, b});
                tri_bottom = static_cast<std::int32_t>(mesh.triangles.size() - 1);
                mesh.triangles.push_back({b, d, c2});
                tri_top = static_cast<std::int32_t>(mesh.triangles.size() - 1);
            }
            if (j == 0) inner_edge_tri[i] = tri_bottom;
            if (j == n_layers - 1) outer_edge_tri[i] = tri_top;
        }
    }

    mesh.boundary_edges.reserve(2 * n_theta);
    for (int i = 0; i < n_theta; ++i) {
        mesh.boundary_edges.push_back(
            {vid(i, 0), vid(i + 1, 0), BoundaryTag::Inner, inner_edge_tri[i]});
    }
    for (int i = 0; i < n_theta; ++i) {
        mesh.boundary_edges.push_back({vid(i, n_layers), vid(i + 1, n_layers),
                                       BoundaryTag::Outer, outer_edge_tri[i]});
    }

    mesh.finalize_geometry();
    return mesh;
}

void write_mesh_dump(const TriMesh& mesh, std::ostream& out) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu %zu %zu\n", mesh.vertex_count(),
                  mesh.triangle_count(), mesh.boundary_edges.size());
    out << buf;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %d\n", mesh.vertices[v].x,
                      mesh.vertices[v].y, static_cast<int>(mesh.vertex_flags[v]));
        out << buf;
    }
    for (const auto& tr : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "%d %d %d\n", tr[0], tr[1], tr[2]);
        out << buf;
    }
    for (const auto& e : mesh.boundary_edges) {
        std::snprintf(buf, sizeof buf, "%d %d %s\n", e.a, e.b,
                      e.tag == BoundaryTag::Inner ? "inner" : "outer");
        out << buf;
    }
}

}  // namespace plap
