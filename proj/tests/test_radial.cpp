#include <doctest.h>

#include <cmath>

#include "plap/radial.hpp"
#include "support/test_oracles.hpp"

using namespace plap;
namespace ts = testsupport;

TEST_CASE("ball torsion closed form, p = 2, N = 2") {
    RadialProfile prof = ball_torsion_profile(PExponent{2.0}, 2, 1.0, 2000);
    CHECK(prof.values.front() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(prof.values.back() == doctest::Approx(0.0).epsilon(1e-14));
    for (std::size_t i = 0; i < prof.r_grid.size(); i += 100) {
        double r = prof.r_grid[i];
        CHECK(prof.values[i] == doctest::Approx((1.0 - r * r) / 4.0).epsilon(1e-12));
    }
    CHECK(prof.E == doctest::Approx(ts::kEBallP2).epsilon(1e-10));
}

TEST_CASE("ball torsion boundary value vanishes for assorted p, N, R") {
    for (double p : {1.3, 2.0, 3.5, 8.0}) {
        for (int N : {2, 3, 5}) {
            for (double R : {0.5, 1.0, 2.5}) {
                RadialProfile prof = ball_torsion_profile(PExponent{p}, N, R, 600);
                CHECK(prof.values.back() == doctest::Approx(0.0).epsilon(1e-13));
                CHECK(prof.E > 0.0);
                for (double v : prof.values) CHECK(v >= 0.0);
            }
        }
    }
}

TEST_CASE("annulus torsion matches the p = 2 closed form") {
    const double r0 = 0.3, r1 = 1.0;
    RadialProfile prof = annulus_torsion_profile(PExponent{2.0}, 2, r0, r1, 4000);
    const double a = (r1 * r1 - r0 * r0) / (4.0 * std::log(r1 / r0));
    const double b = r0 * r0 / 4.0 - a * std::log(r0);
    double linf = 0.0;
    for (std::size_t i = 0; i < prof.r_grid.size(); ++i) {
        double r = prof.r_grid[i];
        double exact = -r * r / 4.0 + a * std::log(r) + b;
        linf = std::max(linf, std::abs(prof.values[i] - exact));
    }
    CHECK(linf <= 1e-8);
    CHECK(prof.values.front() == 0.0);
    CHECK(std::abs(prof.values.back()) <= 1e-10);
    CHECK(prof.E == doctest::Approx(ts::kEAnnulusP2).epsilon(1e-9));
}

TEST_CASE("frozen rigidity constants for the reference annulus") {
    CHECK(annulus_torsion_profile(PExponent{1.5}, 2, 0.3, 1.0, 4000).E ==
          doctest::Approx(ts::kEAnnulusP15).epsilon(1e-7));
    CHECK(annulus_torsion_profile(PExponent{3.0}, 2, 0.3, 1.0, 4000).E ==
          doctest::Approx(ts::kEAnnulusP3).epsilon(1e-7));
}

TEST_CASE("load and gradient rigidity forms agree") {
    for (double p : {1.5, 2.0, 3.0}) {
        RadialProfile prof = annulus_torsion_profile(PExponent{p}, 2, 0.3, 1.0, 8000);
        double eg = profile_gradient_energy(prof, PExponent{p});
        CHECK(eg == doctest::Approx(prof.E).epsilon(5e-5));  // first-order gradient recovery
    }
}

TEST_CASE("removing material lowers the rigidity") {
    for (double p : {1.5, 2.0, 3.0}) {
        double e_ann = annulus_torsion_profile(PExponent{p}, 2, 0.3, 1.0, 2000).E;
        double e_ball = ball_torsion_profile(PExponent{p}, 2, 1.0, 2000).E;
        CHECK(e_ann < e_ball);
    }
}

TEST_CASE("bessel constants") {
    double j01 = bessel_j0_first_zero();
    CHECK(j01 == doctest::Approx(ts::kBesselJ0Zero1).epsilon(1e-12));
    CHECK(std::cyl_bessel_j(0.0, j01) == doctest::Approx(0.0).epsilon(1e-13));
    double k = annulus_cross_product_root(0.3, 1.0);
    CHECK(k * k == doctest::Approx(ts::kLambda1P2Bessel).epsilon(1e-12));
}

TEST_CASE("radial eigenvalue matches the Bessel cross-product root at p = 2") {
    RadialEigenResult res = radial_eigen(PExponent{2.0}, 2, 0.3, 1.0, 6000);
    CHECK(res.lambda1 == doctest::Approx(ts::kLambda1P2Bessel).epsilon(1e-4));
    // normalized positive profile vanishing at both ends
    CHECK(res.profile.values.front() == 0.0);
    CHECK(res.profile.values.back() == 0.0);
    for (double v : res.profile.values) CHECK(v >= 0.0);
}

TEST_CASE("radial eigenvalues for p != 2 match the independent implementation") {
    CHECK(radial_eigen(PExponent{1.5}, 2, 0.3, 1.0, 3000).lambda1 ==
          doctest::Approx(ts::kLambda1P15Radial).epsilon(1e-5));
    CHECK(radial_eigen(PExponent{3.0}, 2, 0.3, 1.0, 3000).lambda1 ==
          doctest::Approx(ts::kLambda1P3Radial).epsilon(1e-5));
}

TEST_CASE("ball mode reproduces the disk eigenvalue") {
    RadialEigenResult res = radial_eigen(PExponent{2.0}, 2, 0.0, 1.0, 4000);
    double j01 = bessel_j0_first_zero();
    CHECK(res.lambda1 == doctest::Approx(j01 * j01).epsilon(1e-5));
    CHECK(res.profile.values.front() > 0.0);  // free center
}

TEST_CASE("grid refinement: increments shrink by >= 3x and stabilize") {
    PExponent p{3.0};
    double l1 = radial_eigen(p, 2, 0.3, 1.0, 1000).lambda1;
    double l2 = radial_eigen(p, 2, 0.3, 1.0, 2000).lambda1;
    double l3 = radial_eigen(p, 2, 0.3, 1.0, 4000).lambda1;
    double d1 = std::abs(l2 - l1), d2 = std::abs(l3 - l2);
    CHECK(d1 / d2 >= 3.0);

    double l4 = radial_eigen(p, 2, 0.3, 1.0, 8000).lambda1;
    CHECK(std::abs(l4 - l3) / l4 <= 1e-6);
}

TEST_CASE("invalid oracle inputs are rejected") {
    CHECK_THROWS_AS(annulus_torsion_profile(PExponent{2.0}, 2, 1.0, 0.3, 2000), ConfigError);
    CHECK_THROWS_AS(radial_eigen(PExponent{2.0}, 2, -0.1, 1.0, 2000), ConfigError);
    CHECK_THROWS_AS(radial_eigen(PExponent{2.0}, 2, 0.3, 1.0, 100), ConfigError);
}
