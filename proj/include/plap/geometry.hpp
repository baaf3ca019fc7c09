#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "plap/errors.hpp"

namespace plap {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double a) const { return {x * a, y * a}; }
    Vec2 operator-() const { return {-x, -y}; }
};

inline Vec2 operator*(double a, Vec2 v) { return v * a; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double norm_sq(Vec2 a) { return a.x * a.x + a.y * a.y; }

/// Punctured disk B(0, r1) \ closure(B(s*e1, r0)).
struct AnnularDomain {
    double r0 = 0.0;  ///< hole radius
    double r1 = 0.0;  ///< outer radius
    double s = 0.0;   ///< hole-center offset along the first axis

    /// Throws GeometryError unless 0 < r0 < r1 and 0 <= s < r1 - r0.
    void validate() const;

    double max_offset() const { return r1 - r0; }
    Vec2 hole_center() const { return {s, 0.0}; }
};

enum class BoundaryTag : std::uint8_t { Inner = 0, Outer = 1 };

enum class VertexFlag : std::uint8_t {
    Interior = 0,
    InnerBoundary = 1,
    OuterBoundary = 2,
};

struct BoundaryEdge {
    std::int32_t a = -1;  ///< first vertex
    std::int32_t b = -1;  ///< second vertex
    BoundaryTag tag = BoundaryTag::Inner;
    std::int32_t tri = -1;  ///< the unique adjacent triangle
};

struct MeshQuality {
    double min_angle = 0.0;  // radians
    double min_area = 0.0;
    double max_aspect_ratio = 0.0;  // longest edge / shortest altitude
};

/// Boundary-conforming triangulation of an AnnularDomain.
///
/// Immutable after construction; safe to share read-only across threads.
/// Per-triangle P1 geometry (areas, basis gradients) is precomputed in
/// structure-of-arrays form so the batched kernels can stream over it.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<std::int32_t, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<VertexFlag> vertex_flags;
    std::uint64_t mesh_id = 0;

    AnnularDomain domain;  ///< generating parameters (exact circles for normals)
    int n_theta = 0;
    int n_layers = 0;

    // Per-triangle data, filled by finalize_geometry(). Structure-of-arrays
    // so the batched kernels can stream: local basis k of triangle t has
    // gradient (gbx[k][t], gby[k][t]).
    std::vector<double> tri_area;
    std::array<std::vector<double>, 3> gbx, gby;
    std::vector<std::int32_t> tri_ia, tri_ib, tri_ic;

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }

    double total_area() const;
    MeshQuality quality() const;

    /// Signed area of triangle t (positive for the stored orientation).
    double signed_area(std::size_t t) const;

    /// Recomputes tri_area / grad_* / tri_i* from vertices + triangles.
    /// Throws MeshQualityError if any triangle is degenerate or inverted.
    void finalize_geometry();

    /// V - E + F; 0 for a valid annulus triangulation.
    int euler_characteristic() const;
};

/// Structured transfinite mesh of the punctured disk: angular grid of
/// n_theta columns, n_layers radial layers blended linearly between the
/// (offset) inner circle and the outer circle at shared angle, each quad
/// split along its shorter diagonal.
TriMesh build_annulus_mesh(const AnnularDomain& domain, int n_theta, int n_layers);

/// Reflection about the hyperplane {x1 = s}.
inline Vec2 reflect_about_hyperplane(Vec2 p, double s) {
    return {2.0 * s - p.x, p.y};
}

/// Plain-text mesh dump: header "V T BE", then one vertex per line
/// "x y flag", one triangle per line "i j k", one boundary edge per line
/// "i j tag" with tag in {inner, outer}.
void write_mesh_dump(const TriMesh& mesh, std::ostream& out);

}  // namespace plap
