#include "plap/radial.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>

#include "plap/errors.hpp"

namespace plap {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Surface measure of the unit (N-1)-sphere: 2 pi^(N/2) / Gamma(N/2).
double sphere_measure(int N) {
    return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

}  // namespace

double profile_value(const RadialProfile& profile, double r) {
    const auto& g = profile.r_grid;
    if (g.size() < 2) throw Error("profile_value: empty profile");
    if (r <= g.front()) return profile.values.front();
    if (r >= g.back()) return profile.values.back();
    auto it = std::upper_bound(g.begin(), g.end(), r);
    std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
    double t = (r - g[i]) / (g[i + 1] - g[i]);
    return (1.0 - t) * profile.values[i] + t * profile.values[i + 1];
}

RadialProfile ball_torsion_profile(PExponent p, int N, double R, int n_grid) {
    if (!(R > 0.0) || N < 2) throw ConfigError("ball_torsion_profile: need R > 0, N >= 2");
    if (n_grid < 16) throw ConfigError("ball_torsion_profile: n_grid too small");
    const double q = p.p / (p.p - 1.0);
    const double coef = (p.p - 1.0) / p.p * std::pow(static_cast<double>(N), -1.0 / (p.p - 1.0));
    auto y = [&](double r) { return coef * (std::pow(R, q) - std::pow(r, q)); };

    RadialProfile prof;
    prof.dimension = N;
    prof.r_grid.resize(n_grid + 1);
    prof.values.resize(n_grid + 1);
    const double h = R / n_grid;
    for (int i = 0; i <= n_grid; ++i) {
        double r = i * h;
        prof.r_grid[i] = r;
        prof.values[i] = y(r);
    }

    // Internal consistency: the radial flux identity
    // r^(N-1)|y'|^(p-2) y' = -r^N / N must hold at the grid points.
    for (int i = 1; i < n_grid; ++i) {
        double r = prof.r_grid[i];
        double yp = -std::pow(r / N, 1.0 / (p.p - 1.0));
        double fluxv = std::pow(r, N - 1) * std::pow(std::abs(yp), p.p - 2.0) * yp;
        double rhs = -std::pow(r, N) / N;
        if (std::abs(fluxv - rhs) > 1e-8 * (1.0 + std::abs(rhs))) {
            throw Error("ball_torsion_profile: radial flux identity violated");
        }
    }

    // E = omega * int y(r) r^(N-1) dr, per-cell Simpson with exact midpoints.
    const double omega = sphere_measure(N);
    double E = 0.0;
    for (int i = 0; i < n_grid; ++i) {
        double ra = prof.r_grid[i], rb = prof.r_grid[i + 1], rm = 0.5 * (ra + rb);
        auto f = [&](double r) { return y(r) * std::pow(r, N - 1); };
        E += (rb - ra) / 6.0 * (f(ra) + 4.0 * f(rm) + f(rb));
    }
    prof.E = omega * E;
    return prof;
}

namespace {

struct AnnulusOde {
    double p, r0, r1;
    int N;

    double yprime(double r, double c) const {
        double num = std::abs(std::pow(c, N) - std::pow(r, N));
        double t = num / (N * std::pow(r, N - 1));
        double mag = std::pow(t, 1.0 / (p - 1.0));
        return (c >= r) ? mag : -mag;
    }

    /// y(r1) for a given interior critical radius c, by cumulative per-cell
    /// Simpson; optionally records the whole profile.
    double integrate(double c, int n, std::vector<double>* nodes,
                     std::vector<double>* values) const {
        const double h = (r1 - r0) / n;
        double y = 0.0;
        if (nodes) {
            nodes->resize(n + 1);
            values->resize(n + 1);
            (*nodes)[0] = r0;
            (*values)[0] = 0.0;
        }
        for (int i = 0; i < n; ++i) {
            double ra = r0 + i * h, rb = ra + h, rm = 0.5 * (ra + rb);
            y += h / 6.0 * (yprime(ra, c) + 4.0 * yprime(rm, c) + yprime(rb, c));
            if (nodes) {
                (*nodes)[i + 1] = rb;
                (*values)[i + 1] = y;
            }
        }
        return y;
    }
};

}  // namespace

RadialProfile annulus_torsion_profile(PExponent p, int N, double r0, double r1, int n_grid) {
    if (!(0.0 < r0 && r0 < r1)) throw ConfigError("annulus_torsion_profile: need 0 < r0 < r1");
    if (n_grid < 1000) n_grid = 1000;
    AnnulusOde ode{p.p, r0, r1, N};

    // y(r1; c) is increasing in c; bracket and bisect.
    double lo = r0, hi = r1;
    double glo = ode.integrate(lo, n_grid, nullptr, nullptr);
    double ghi = ode.integrate(hi, n_grid, nullptr, nullptr);
    if (!(glo < 0.0) || !(ghi > 0.0)) {
        throw BracketFailure("annulus_torsion_profile: bisection bracket failed sign test");
    }
    const double tol = 1e-12 * (r1 - r0);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double g = ode.integrate(mid, n_grid, nullptr, nullptr);
        if (g < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double c = 0.5 * (lo + hi);

    RadialProfile prof;
    prof.dimension = N;
    ode.integrate(c, n_grid, &prof.r_grid, &prof.values);

    // E = omega * int y r^(N-1) dr = -omega * int y'(r) r^N / N dr
    // (integration by parts; both boundary values of y vanish). Only y' is
    // needed, so per-cell Simpson applies directly.
    const double omega = sphere_measure(N);
    const double h = (r1 - r0) / n_grid;
    double E = 0.0;
    for (int i = 0; i < n_grid; ++i) {
        double ra = r0 + i * h, rb = ra + h, rm = 0.5 * (ra + rb);
        auto f = [&](double r) { return ode.yprime(r, c) * std::pow(r, N) / N; };
        E += h / 6.0 * (f(ra) + 4.0 * f(rm) + f(rb));
    }
    prof.E = -omega * E;
    return prof;
}

double profile_gradient_energy(const RadialProfile& profile, PExponent p) {
    // Central-difference gradient magnitudes on the stored grid; trapezoid.
    const auto& r = profile.r_grid;
    const auto& y = profile.values;
    const int N = profile.dimension;
    const double omega = sphere_measure(N);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        double dy = (y[i + 1] - y[i]) / (r[i + 1] - r[i]);
        double rm = 0.5 * (r[i] + r[i + 1]);
        acc += std::pow(std::abs(dy), p.p) * std::pow(rm, N - 1) * (r[i + 1] - r[i]);
    }
    return omega * acc;
}

namespace {

/// Tridiagonal symmetric solve (Thomas).
void solve_tridiag(std::vector<double>& diag, std::vector<double>& off,
                   std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
    }
}

}  // namespace

RadialEigenResult radial_eigen(PExponent p, int N, double r0, double r1, int n_grid) {
    if (!(r0 >= 0.0) || !(r0 < r1)) throw ConfigError("radial_eigen: need 0 <= r0 < r1");
    if (n_grid < 500) throw ConfigError("radial_eigen: n_grid must be >= 500");
    const bool ball = (r0 == 0.0);
    const int n = n_grid;
    const double h = (r1 - r0) / n;
    const double pp = p.p;

    // Unknowns: nodes 1..n-1 for the annulus; nodes 0..n-1 for the ball
    // (free center, natural condition).
    const int first = ball ? 0 : 1;
    const int nun = n - first;  // unknown count; node n is always Dirichlet

    std::vector<double> r(n + 1);
    for (int i = 0; i <= n; ++i) r[i] = r0 + i * h;

    // Flux weights at half points and exact dual-cell mass weights.
    std::vector<double> wf(n);
    for (int i = 0; i < n; ++i) wf[i] = std::pow(0.5 * (r[i] + r[i + 1]), N - 1);
    std::vector<double> wm(n + 1);
    for (int i = 0; i <= n; ++i) {
        double lo = std::max(r[i] - 0.5 * h, r0);
        double hi = std::min(r[i] + 0.5 * h, r1);
        wm[i] = (std::pow(hi, N) - std::pow(lo, N)) / N;
    }

    auto full = [&](const std::vector<double>& u) {
        std::vector<double> v(n + 1, 0.0);
        for (int i = 0; i < nun; ++i) v[first + i] = u[i];
        return v;
    };
    auto mass_p = [&](const std::vector<double>& u) {
        std::vector<double> v = full(u);
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) acc += wm[i] * std::pow(std::abs(v[i]), pp);
        return acc;
    };
    auto grad_p = [&](const std::vector<double>& u) {
        std::vector<double> v = full(u);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = (v[i + 1] - v[i]) / h;
            acc += h * wf[i] * std::pow(std::abs(d), pp);
        }
        return acc;
    };

    auto psi = [&](double t, double e2) {
        return std::pow(e2 + t * t, 0.5 * pp - 1.0) * t;
    };
    auto dpsi = [&](double t, double e2) {
        double m = e2 + t * t;
        return std::pow(m, 0.5 * pp - 1.0) + (pp - 2.0) * std::pow(m, 0.5 * pp - 2.0) * t * t;
    };

    // Damped Newton for  sum_cells h wf Gamma_eps(du/h) - <load, u>.
    auto newton = [&](std::vector<double>& u, const std::vector<double>& load, double e2,
                      double tol) {
        std::vector<double> v, res(nun), diag(nun), off(nun > 0 ? nun - 1 : 0), step;
        double bnorm = 0.0;
        for (double x : load) bnorm += x * x;
        bnorm = std::sqrt(bnorm);
        if (bnorm == 0.0) bnorm = 1.0;
        auto residual = [&](const std::vector<double>& uu, std::vector<double>& out) {
            v = full(uu);
            for (int i = 0; i < nun; ++i) {
                int node = first + i;
                double grad = 0.0;
                if (node > 0) grad += wf[node - 1] * psi((v[node] - v[node - 1]) / h, e2);
                grad -= wf[node] * psi((v[node + 1] - v[node]) / h, e2);
                out[i] = grad - load[i];
            }
        };
        auto energy = [&](const std::vector<double>& uu) {
            v = full(uu);
            double acc = 0.0;
            double epow = e2 == 0.0 ? 0.0 : std::pow(e2, 0.5 * pp);
            for (int i = 0; i < n; ++i) {
                double d = (v[i + 1] - v[i]) / h;
                acc += h * wf[i] * (std::pow(e2 + d * d, 0.5 * pp) - epow) / pp;
            }
            for (int i = 0; i < nun; ++i) acc -= load[i] * uu[i];
            return acc;
        };
        residual(u, res);
        double en = energy(u);
        double rn_prev = std::numeric_limits<double>::max();
        for (int it = 0; it < 200; ++it) {
            double rn = 0.0;
            for (double x : res) rn += x * x;
            rn = std::sqrt(rn);
            if (rn <= tol * bnorm) return;
            // Rounding floor: an exact tridiagonal solve leaves a residual
            // of order eps*||K||*||u||; once progress stalls there, stop.
            if (rn <= 1e-6 * bnorm && rn >= 0.5 * rn_prev) return;
            rn_prev = rn;
            v = full(u);
            for (int i = 0; i < nun; ++i) {
                int node = first + i;
                double d = 0.0;
                if (node > 0) d += wf[node - 1] * dpsi((v[node] - v[node - 1]) / h, e2) / h;
                d += wf[node] * dpsi((v[node + 1] - v[node]) / h, e2) / h;
                diag[i] = d;
                if (i + 1 < nun) off[i] = -wf[node] * dpsi((v[node + 1] - v[node]) / h, e2) / h;
            }
            std::vector<double> dg = diag, of = off;
            step = res;
            for (double& x : step) x = -x;
            solve_tridiag(dg, of, step);
            double dir = 0.0;
            for (int i = 0; i < nun; ++i) dir += res[i] * step[i];
            const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(en);
            double t = 1.0;
            std::vector<double> trial(nun), res_try(nun);
            if (-dir <= noise) {
                // The energy cannot resolve the decrease; accept on
                // residual contraction (see the 2D Newton).
                bool accepted = false;
                for (int bt = 0; bt < 40; ++bt) {
                    for (int i = 0; i < nun; ++i) trial[i] = u[i] + t * step[i];
                    residual(trial, res_try);
                    double rt = 0.0;
                    for (double x : res_try) rt += x * x;
                    if (std::sqrt(rt) < rn) {
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!accepted) return;  // rounding floor reached
                u = trial;
                res = res_try;
                en = energy(u);
                rn_prev = rn;
                continue;
            }
            double etrial = 0.0;
            for (int bt = 0; bt < 40; ++bt) {
                for (int i = 0; i < nun; ++i) trial[i] = u[i] + t * step[i];
                etrial = energy(trial);
                if (etrial <= en + 1e-4 * t * dir + noise / 4.0) break;
                t *= 0.5;
            }
            if (std::getenv("PLAP_RADIAL_TRACE")) {
                std::fprintf(stderr, "  1d it=%d rn=%.3e bn=%.3e dir=%.2e t=%.2e e2=%.1e\n", it,
                             rn, bnorm, dir, t, e2);
            }
            u = trial;
            en = etrial;
            residual(u, res);
        }
        throw NonConvergence("radial_eigen: inner Newton stalled", 0.0);
    };

    // Initial iterate: positive cap vanishing at the Dirichlet ends.
    std::vector<double> u(nun);
    for (int i = 0; i < nun; ++i) {
        double rr = r[first + i];
        u[i] = ball ? (r1 - rr) * (r1 + rr) : (rr - r0) * (r1 - rr);
    }
    double nrm = std::pow(mass_p(u), 1.0 / pp);
    for (double& x : u) x /= nrm;
    double lambda = grad_p(u) / mass_p(u);

    const double e2_solve = (pp >= 2.0) ? 0.0 : 1e-16;  // eps^2 for the inner solves
    RadialEigenResult out;
    int it = 0;
    for (; it < 500; ++it) {
        std::vector<double> vfull = full(u);
        std::vector<double> load(nun);
        for (int i = 0; i < nun; ++i) {
            double val = vfull[first + i];
            load[i] = lambda * wm[first + i] * std::copysign(std::pow(std::abs(val), pp - 1.0), val);
        }
        if (it == 0) {
            // Cold start: one linear (p = 2) solve for the shape, then
            // eps-continuation. Newton hops across the |du| ~ 0 kink when
            // started far away for p < 2.
            std::vector<double> dg(nun), of(nun > 1 ? nun - 1 : 0);
            for (int i = 0; i < nun; ++i) {
                int node = first + i;
                dg[i] = ((node > 0 ? wf[node - 1] : 0.0) + wf[node]) / h;
                if (i + 1 < nun) of[i] = -wf[node] / h;
            }
            u = load;
            solve_tridiag(dg, of, u);
            for (double e2 : {1e-4, 1e-8, 1e-12}) {
                if (e2 > e2_solve) newton(u, load, e2, 1e-8);
            }
        }
        newton(u, load, e2_solve, 1e-10);
        for (double& x : u) x = std::abs(x);
        nrm = std::pow(mass_p(u), 1.0 / pp);
        for (double& x : u) x /= nrm;
        double lnew = grad_p(u) / mass_p(u);
        double rel = std::abs(lnew - lambda) / lnew;
        lambda = lnew;
        if (rel <= 1e-11) break;
    }
    if (it >= 500) throw NonConvergence("radial_eigen: lambda iteration stalled", lambda);

    out.lambda1 = lambda;
    out.iterations = it + 1;
    out.profile.dimension = N;
    out.profile.r_grid = r;
    out.profile.values = full(u);
    double load_integral = 0.0;
    for (int i = 0; i <= n; ++i) load_integral += wm[i] * out.profile.values[i];
    out.profile.E = sphere_measure(N) * load_integral;
    return out;
}

double bessel_j0_first_zero() {
    auto f = [](double x) { return std::cyl_bessel_j(0.0, x); };
    double lo = 2.0, hi = 3.0;  // J0(2) > 0 > J0(3)
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    return 0.5 * (lo + hi);
}

double annulus_cross_product_root(double r0, double r1) {
    if (!(0.0 < r0 && r0 < r1)) throw ConfigError("annulus_cross_product_root: need 0 < r0 < r1");
    auto f = [&](double k) {
        return std::cyl_bessel_j(0.0, k * r0) * std::cyl_neumann(0.0, k * r1) -
               std::cyl_bessel_j(0.0, k * r1) * std::cyl_neumann(0.0, k * r0);
    };
    // First root is near pi/(r1-r0); scan for the bracketing sign change.
    double step = 0.01 * kPi / (r1 - r0);
    double a = step, fa = f(a);
    double b = a;
    for (int i = 0; i < 100000; ++i) {
        b = a + step;
        double fb = f(b);
        if (fa == 0.0) return a;
        if (fa * fb < 0.0) break;
        a = b;
        fa = fb;
    }
    double lo = a, hi = b;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (f(lo) * f(mid) <= 0.0)
            hi = mid;
        else
            lo = mid;
        if (hi - lo < 1e-14 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace plap
