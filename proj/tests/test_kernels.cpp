#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "plap/kernels.hpp"
#include "support/test_oracles.hpp"

using plap::kernels::Backend;

namespace {

std::vector<double> random_vec(std::mt19937_64& gen, std::size_t n, double lo = -1.0,
                               double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(gen);
    return v;
}

/// Kahan-compensated long double dot: reference for the reductions.
long double dot_reference(const std::vector<double>& x, const std::vector<double>& y) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += static_cast<long double>(x[i]) * static_cast<long double>(y[i]);
    }
    return acc;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
    CHECK(std::strcmp(plap::kernels::scalar_backend().name, "scalar") == 0);
    CHECK(&plap::kernels::active() != nullptr);
}

TEST_CASE("backend selection honors requests") {
    const char* original = plap::kernels::active().name;
    CHECK(plap::kernels::select("scalar"));
    CHECK(std::strcmp(plap::kernels::active().name, "scalar") == 0);
    CHECK_FALSE(plap::kernels::select("not-a-backend"));
    CHECK(plap::kernels::select("auto"));
    if (plap::kernels::avx2_backend()) {
        CHECK(plap::kernels::select("avx2"));
        CHECK(std::strcmp(plap::kernels::active().name, "avx2") == 0);
    }
    plap::kernels::select(original);
}

TEST_CASE("SIMD elementwise kernels are bit-identical to scalar") {
    const Backend* simd = plap::kernels::avx2_backend();
    if (!simd) return;  // nothing to compare on this host
    const Backend& ref = plap::kernels::scalar_backend();
    auto gen = testsupport::rng(11);

    // Awkward lengths on purpose: tails of 1..3 lanes.
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 64u, 65u, 66u, 67u, 1031u}) {
        std::vector<double> x = random_vec(gen, n), y0 = random_vec(gen, n);
        double a = 0.7315, b = -1.25;

        auto ys = y0, yv = y0;
        ref.axpy(a, x.data(), ys.data(), n);
        simd->axpy(a, x.data(), yv.data(), n);
        CHECK(bitwise_equal(ys, yv));

        ys = y0;
        yv = y0;
        ref.xpby(x.data(), b, ys.data(), n);
        simd->xpby(x.data(), b, yv.data(), n);
        CHECK(bitwise_equal(ys, yv));

        std::vector<double> zs(n), zv(n);
        ref.hadamard(x.data(), y0.data(), zs.data(), n);
        simd->hadamard(x.data(), y0.data(), zv.data(), n);
        CHECK(bitwise_equal(zs, zv));

        ys = y0;
        yv = y0;
        ref.scale(a, ys.data(), n);
        simd->scale(a, yv.data(), n);
        CHECK(bitwise_equal(ys, yv));

        std::vector<double> gx = random_vec(gen, n), gy = random_vec(gen, n);
        ref.sq_norm_shift(1e-8, gx.data(), gy.data(), zs.data(), n);
        simd->sq_norm_shift(1e-8, gx.data(), gy.data(), zv.data(), n);
        CHECK(bitwise_equal(zs, zv));
    }
}

TEST_CASE("tri_gradients agrees bitwise across backends") {
    const Backend* simd = plap::kernels::avx2_backend();
    if (!simd) return;
    const Backend& ref = plap::kernels::scalar_backend();
    auto gen = testsupport::rng(12);
    std::uniform_int_distribution<std::int32_t> idx(0, 299);

    for (std::size_t ntri : {1u, 3u, 4u, 9u, 257u}) {
        std::vector<double> u = random_vec(gen, 300);
        std::vector<std::int32_t> ia(ntri), ib(ntri), ic(ntri);
        for (std::size_t t = 0; t < ntri; ++t) {
            ia[t] = idx(gen);
            ib[t] = idx(gen);
            ic[t] = idx(gen);
        }
        auto cxa = random_vec(gen, ntri), cxb = random_vec(gen, ntri), cxc = random_vec(gen, ntri);
        auto cya = random_vec(gen, ntri), cyb = random_vec(gen, ntri), cyc = random_vec(gen, ntri);
        std::vector<double> gxs(ntri), gys(ntri), gxv(ntri), gyv(ntri);
        ref.tri_gradients(ntri, ia.data(), ib.data(), ic.data(), cxa.data(), cxb.data(),
                          cxc.data(), cya.data(), cyb.data(), cyc.data(), u.data(), gxs.data(),
                          gys.data());
        simd->tri_gradients(ntri, ia.data(), ib.data(), ic.data(), cxa.data(), cxb.data(),
                            cxc.data(), cya.data(), cyb.data(), cyc.data(), u.data(),
                            gxv.data(), gyv.data());
        CHECK(bitwise_equal(gxs, gxv));
        CHECK(bitwise_equal(gys, gyv));
    }
}

TEST_CASE("dot reductions agree with the compensated reference") {
    auto gen = testsupport::rng(13);
    std::vector<const Backend*> backends{&plap::kernels::scalar_backend()};
    if (const Backend* simd = plap::kernels::avx2_backend()) backends.push_back(simd);

    for (std::size_t n : {1u, 5u, 100u, 4097u}) {
        std::vector<double> x = random_vec(gen, n), y = random_vec(gen, n);
        long double exact = dot_reference(x, y);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
        for (const Backend* b : backends) {
            double got = b->dot(x.data(), y.data(), n);
            CHECK(std::abs(static_cast<long double>(got) - exact) <= 1e-13 * scale + 1e-300);
        }
    }
}

TEST_CASE("dot is deterministic per backend") {
    auto gen = testsupport::rng(14);
    std::vector<double> x = random_vec(gen, 2053), y = random_vec(gen, 2053);
    for (const Backend* b :
         {&plap::kernels::scalar_backend(), plap::kernels::avx2_backend()}) {
        if (!b) continue;
        double first = b->dot(x.data(), y.data(), x.size());
        for (int rep = 0; rep < 5; ++rep) {
            CHECK(b->dot(x.data(), y.data(), x.size()) == first);
        }
    }
}
