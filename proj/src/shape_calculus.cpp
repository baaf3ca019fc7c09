#include "plap/shape_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plap {

BoundaryFlux boundary_normal_derivative(const TriMesh& mesh, const NodalField& u,
                                        BoundaryTag tag) {
    check_field(mesh, u);
    BoundaryFlux flux;
    flux.tag = tag;
    const Vec2 hole = mesh.domain.hole_center();
    const int nt = mesh.n_theta, nl = mesh.n_layers;

    // Normal derivative of the quad column (i, j), sampled at the layer
    // midpoint: the average over the quad's two triangles. The symmetric
    // pair cancels the O(h) angular bias a single triangle carries.
    auto quad_flux = [&](int i, int j, Vec2 n) {
        std::size_t t0 = 2 * (static_cast<std::size_t>(j) * nt + i);
        return 0.5 * (dot(p1_gradient(mesh, u, t0), n) +
                      dot(p1_gradient(mesh, u, t0 + 1), n));
    };

    for (const auto& e : mesh.boundary_edges) {
        if (e.tag != tag) continue;
        Vec2 a = mesh.vertices[e.a], b = mesh.vertices[e.b];
        Vec2 mid = 0.5 * (a + b);
        Vec2 n;
        if (tag == BoundaryTag::Inner) {
            Vec2 d = hole - mid;  // outward normal of the domain points into the hole
            n = d * (1.0 / norm(d));
        } else {
            n = mid * (1.0 / norm(mid));
        }
        // Wall value extrapolated from the first two layer midpoints
        // (depths 1/2 and 3/2 of a layer along the transfinite fiber).
        // Second order on the structured mesh; exact for linear fields.
        int i = static_cast<int>(&e - mesh.boundary_edges.data()) % nt;
        double value;
        if (tag == BoundaryTag::Inner) {
            value = 1.5 * quad_flux(i, 0, n) - 0.5 * quad_flux(i, 1, n);
        } else {
            value = 1.5 * quad_flux(i, nl - 1, n) - 0.5 * quad_flux(i, nl - 2, n);
        }
        flux.samples.push_back({mid, n, value, norm(b - a)});
    }
    if (flux.samples.empty()) {
        throw TagNotFound("boundary_normal_derivative: no edges with requested tag");
    }
    return flux;
}

double hadamard_torsion_derivative(const BoundaryFlux& flux, PExponent p) {
    double acc = 0.0;
    for (const auto& s : flux.samples) {
        acc += std::pow(std::abs(s.value), p.p) * s.normal.x * s.length;
    }
    return acc;
}

double hadamard_eigen_derivative(const BoundaryFlux& flux, PExponent p) {
    return -(p.p - 1.0) * hadamard_torsion_derivative(flux, p);
}

PerturbationField PerturbationField::translation(const AnnularDomain& domain) {
    domain.validate();
    PerturbationField V;
    V.s = domain.s;
    const double gap = domain.r1 - domain.r0 - domain.s;
    V.inner_radius = domain.r0 + 0.2 * gap;
    V.outer_radius = domain.r1 - 0.2 * gap;
    return V;
}

PerturbationField PerturbationField::zero_field() {
    PerturbationField V;
    V.zero = true;
    return V;
}

double PerturbationField::rho(Vec2 x) const {
    if (zero) return 0.0;
    double d_in = norm(x - Vec2{s, 0.0}) - inner_radius;
    if (d_in <= 0.0) return 1.0;
    double d_out = outer_radius - norm(x);
    if (d_out <= 0.0) return 0.0;
    double t = d_in / (d_in + d_out);
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

Vec2 PerturbationField::grad_rho(Vec2 x) const {
    if (zero) return {0.0, 0.0};
    Vec2 rel = x - Vec2{s, 0.0};
    double d_in = norm(rel) - inner_radius;
    if (d_in <= 0.0) return {0.0, 0.0};
    double rx = norm(x);
    double d_out = outer_radius - rx;
    if (d_out <= 0.0) return {0.0, 0.0};
    double sum = d_in + d_out;
    double t = d_in / sum;
    Vec2 grad_din = rel * (1.0 / norm(rel));
    Vec2 grad_dout = -(x * (1.0 / rx));
    Vec2 grad_t = (d_out * grad_din - d_in * grad_dout) * (1.0 / (sum * sum));
    double dh = 6.0 * t * (1.0 - t);  // -d/dt of the smoothstep ramp
    return -dh * grad_t;
}

PucciSerrinResult pucci_serrin_residual(const TriMesh& mesh, const NodalField& u, PExponent p,
                                        double load_value, const PerturbationField& V) {
    check_field(mesh, u);

    // Same 7-point rule as the field integrals.
    const double s15 = std::sqrt(15.0);
    const double beta = (6.0 - s15) / 21.0, alpha = 1.0 - 2.0 * beta;
    const double delta = (6.0 + s15) / 21.0, gamma = 1.0 - 2.0 * delta;
    const double wb = (155.0 - s15) / 1200.0, wd = (155.0 + s15) / 1200.0;
    const double third = 1.0 / 3.0;
    const double L[7][3] = {{third, third, third}, {alpha, beta, beta},  {beta, alpha, beta},
                            {beta, beta, alpha},   {gamma, delta, delta}, {delta, gamma, delta},
                            {delta, delta, gamma}};
    const double W[7] = {9.0 / 40.0, wb, wb, wb, wd, wd, wd};

    PucciSerrinResult out;
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const std::int32_t iv[3] = {mesh.tri_ia[t], mesh.tri_ib[t], mesh.tri_ic[t]};
        const Vec2 xv[3] = {mesh.vertices[iv[0]], mesh.vertices[iv[1]], mesh.vertices[iv[2]]};
        Vec2 g = p1_gradient(mesh, u, t);
        double gp = std::pow(norm_sq(g), 0.5 * p.p);              // |grad u|^p
        double gp2 = (norm_sq(g) == 0.0) ? 0.0
                                         : std::pow(norm_sq(g), 0.5 * p.p - 1.0);  // |g|^(p-2)
        const double area = mesh.tri_area[t];
        for (int k = 0; k < 7; ++k) {
            Vec2 xq = L[k][0] * xv[0] + L[k][1] * xv[1] + L[k][2] * xv[2];
            double w = area * W[k];
            double rho = V.rho(xq);
            Vec2 grho = V.grad_rho(xq);
            // V = rho e1: div V = d(rho)/dx1, (DV)* grad u = (du/dx1) grad(rho).
            out.term_div += w * grho.x * gp / p.p;
            out.term_dv += w * g.x * dot(grho, g) * gp2;
            out.term_load += w * rho * g.x * load_value;
        }
    }

    for (BoundaryTag tag : {BoundaryTag::Inner, BoundaryTag::Outer}) {
        BoundaryFlux flux = boundary_normal_derivative(mesh, u, tag);
        for (const auto& s : flux.samples) {
            double vn = V.rho(s.midpoint) * s.normal.x;  // <V, n> with V = rho e1
            out.lhs += std::pow(std::abs(s.value), p.p) * vn * s.length;
        }
    }
    out.lhs *= -(p.p - 1.0) / p.p;

    double rhs = out.term_div - out.term_dv + out.term_load;
    out.residual = std::abs(out.lhs - rhs);
    out.scale = std::max({std::abs(out.lhs), std::abs(out.term_div), std::abs(out.term_dv),
                          std::abs(out.term_load)});
    return out;
}

namespace {

/// Uniform bucket grid over triangle bounding boxes for point location.
struct TriLocator {
    const TriMesh& mesh;
    double x0, y0, inv_cell;
    int nx, ny;
    std::vector<std::vector<std::int32_t>> buckets;

    explicit TriLocator(const TriMesh& m) : mesh(m) {
        double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
        double ymin = xmin, ymax = -xmin;
        for (const Vec2& v : m.vertices) {
            xmin = std::min(xmin, v.x);
            xmax = std::max(xmax, v.x);
            ymin = std::min(ymin, v.y);
            ymax = std::max(ymax, v.y);
        }
        int target = std::max(8, static_cast<int>(std::sqrt(
                                     static_cast<double>(m.triangle_count()) / 2.0)));
        nx = ny = target;
        double cell = std::max((xmax - xmin) / nx, (ymax - ymin) / ny);
        if (cell <= 0.0) cell = 1.0;
        inv_cell = 1.0 / cell;
        x0 = xmin;
        y0 = ymin;
        nx = static_cast<int>((xmax - xmin) * inv_cell) + 1;
        ny = static_cast<int>((ymax - ymin) * inv_cell) + 1;
        buckets.resize(static_cast<std::size_t>(nx) * ny);
        for (std::size_t t = 0; t < m.triangle_count(); ++t) {
            const auto& tr = m.triangles[t];
            double txmin = std::min({m.vertices[tr[0]].x, m.vertices[tr[1]].x, m.vertices[tr[2]].x});
            double txmax = std::max({m.vertices[tr[0]].x, m.vertices[tr[1]].x, m.vertices[tr[2]].x});
            double tymin = std::min({m.vertices[tr[0]].y, m.vertices[tr[1]].y, m.vertices[tr[2]].y});
            double tymax = std::max({m.vertices[tr[0]].y, m.vertices[tr[1]].y, m.vertices[tr[2]].y});
            int ix0 = cell_x(txmin), ix1 = cell_x(txmax);
            int iy0 = cell_y(tymin), iy1 = cell_y(tymax);
            for (int ix = ix0; ix <= ix1; ++ix) {
                for (int iy = iy0; iy <= iy1; ++iy) {
                    buckets[static_cast<std::size_t>(iy) * nx + ix].push_back(
                        static_cast<std::int32_t>(t));
                }
            }
        }
    }

    int cell_x(double x) const {
        return std::clamp(static_cast<int>((x - x0) * inv_cell), 0, nx - 1);
    }
    int cell_y(double y) const {
        return std::clamp(static_cast<int>((y - y0) * inv_cell), 0, ny - 1);
    }

    /// Barycentric coordinates of q in triangle t.
    void barycentric(std::int32_t t, Vec2 q, double lam[3]) const {
        const auto& tr = mesh.triangles[t];
        Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
        double den = cross(b - a, c - a);
        lam[1] = cross(q - a, c - a) / den;
        lam[2] = cross(b - a, q - a) / den;
        lam[0] = 1.0 - lam[1] - lam[2];
    }

    /// P1 interpolation at q; throws PointLocationFailure when q lies
    /// outside every candidate triangle beyond tolerance.
    double interpolate(const std::vector<double>& values, Vec2 q) const {
        const auto& bucket = buckets[static_cast<std::size_t>(cell_y(q.y)) * nx + cell_x(q.x)];
        double best = -std::numeric_limits<double>::max();
        std::int32_t best_t = -1;
        double best_lam[3] = {0, 0, 0};
        auto consider = [&](std::int32_t t) {
            double lam[3];
            barycentric(t, q, lam);
            double m = std::min({lam[0], lam[1], lam[2]});
            if (m > best) {
                best = m;
                best_t = t;
                std::copy(lam, lam + 3, best_lam);
            }
        };
        for (std::int32_t t : bucket) consider(t);
        if (best < -1e-10) {
            // Rare: point near a bucket border. Fall back to a full scan
            // before declaring a geometry bug.
            for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
                consider(static_cast<std::int32_t>(t));
            }
        }
        if (best_t < 0 || best < -1e-10) {
            throw PointLocationFailure("reflected point lies outside the mesh");
        }
        const auto& tr = mesh.triangles[best_t];
        return best_lam[0] * values[tr[0]] + best_lam[1] * values[tr[1]] +
               best_lam[2] * values[tr[2]];
    }
};

}  // namespace

ReflectionReport reflection_comparison(const TriMesh& mesh, const NodalField& u, double s) {
    check_field(mesh, u);
    TriLocator locator(mesh);

    double max_u = 0.0;
    for (double v : u.values) max_u = std::max(max_u, std::abs(v));
    const double tol_geom = 1e-3 * max_u;
    const double plane_tol = 1e-12 * mesh.domain.r1;

    ReflectionReport rep;
    rep.min_gap = std::numeric_limits<double>::max();
    std::size_t violations = 0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.vertex_flags[v] != VertexFlag::Interior) continue;
        Vec2 x = mesh.vertices[v];
        if (!(x.x > s + plane_tol)) continue;
        double mirrored = locator.interpolate(u.values, reflect_about_hyperplane(x, s));
        double gap = mirrored - u.values[v];
        rep.min_gap = std::min(rep.min_gap, gap);
        if (gap < -tol_geom) ++violations;
        ++rep.sampled;
    }
    if (rep.sampled == 0) {
        rep.min_gap = 0.0;
        return rep;
    }
    rep.violating_fraction = static_cast<double>(violations) / rep.sampled;
    return rep;
}

MirrorPairReport mirrored_inner_flux_margin(const TriMesh& mesh, const BoundaryFlux& inner) {
    if (inner.tag != BoundaryTag::Inner) {
        throw ConfigError("mirrored_inner_flux_margin: inner flux required");
    }
    const int n = mesh.n_theta;
    if (n <= 0 || n % 2 != 0) {
        throw ConfigError("mirrored_inner_flux_margin: structured mesh with even n_theta required");
    }
    if (inner.samples.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("mirrored_inner_flux_margin: unexpected sample count");
    }
    MirrorPairReport rep;
    rep.min_margin = std::numeric_limits<double>::max();
    for (const auto& s : inner.samples) {
        rep.max_abs_flux = std::max(rep.max_abs_flux, std::abs(s.value));
    }
    const double s_off = mesh.domain.s;
    for (int i = 0; i < n; ++i) {
        // Edge i spans angles about the hole center; its midpoint is on the
        // {x1 > s} side iff midpoint.x > s. Mirror edge: j = n/2 - 1 - i (mod n).
        if (!(inner.samples[i].midpoint.x > s_off)) continue;
        int j = ((n / 2 - 1 - i) % n + n) % n;
        double margin = std::abs(inner.samples[j].value) - std::abs(inner.samples[i].value);
        rep.min_margin = std::min(rep.min_margin, margin);
        ++rep.pairs;
    }
    if (rep.pairs == 0) rep.min_margin = 0.0;
    return rep;
}

}  // namespace plap
