// AVX2 variants of the data-parallel kernels. Compiled with -mavx2 in its
// own translation unit; callers go through avx2_backend(), which returns
// nullptr when the CPU lacks AVX2.
//
// Elementwise kernels use plain mul/add (no FMA) so each lane performs the
// same rounded operations as the scalar backend, in the same order: the
// results are bit-identical. dot() keeps 4 lane accumulators and combines
// them as ((l0+l1)+(l2+l3)) + tail, which reassociates the sum; it is
// deterministic but only roundoff-equal to scalar.

#include "plap/kernels.hpp"

#if defined(PLAP_COMPILE_AVX2)

#include <immintrin.h>

namespace plap::kernels {

namespace {

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vy));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double r = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpby_avx2(const double* x, double b, double* y, std::size_t n) {
    __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vx, _mm256_mul_pd(vb, vy)));
    }
    for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

void hadamard_avx2(const double* x, const double* y, double* z, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                              _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

void tri_gradients_avx2(std::size_t ntri, const std::int32_t* ia,
                        const std::int32_t* ib, const std::int32_t* ic,
                        const double* cxa, const double* cxb, const double* cxc,
                        const double* cya, const double* cyb, const double* cyc,
                        const double* u, double* gx, double* gy) {
    std::size_t t = 0;
    for (; t + 4 <= ntri; t += 4) {
        __m128i via = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ia + t));
        __m128i vib = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ib + t));
        __m128i vic = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ic + t));
        __m256d ua = _mm256_i32gather_pd(u, via, 8);
        __m256d ub = _mm256_i32gather_pd(u, vib, 8);
        __m256d uc = _mm256_i32gather_pd(u, vic, 8);
        __m256d vgx = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(cxa + t), ua),
                          _mm256_mul_pd(_mm256_loadu_pd(cxb + t), ub)),
            _mm256_mul_pd(_mm256_loadu_pd(cxc + t), uc));
        __m256d vgy = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(cya + t), ua),
                          _mm256_mul_pd(_mm256_loadu_pd(cyb + t), ub)),
            _mm256_mul_pd(_mm256_loadu_pd(cyc + t), uc));
        _mm256_storeu_pd(gx + t, vgx);
        _mm256_storeu_pd(gy + t, vgy);
    }
    for (; t < ntri; ++t) {
        double ua = u[ia[t]], ub = u[ib[t]], uc = u[ic[t]];
        gx[t] = (cxa[t] * ua + cxb[t] * ub) + cxc[t] * uc;
        gy[t] = (cya[t] * ua + cyb[t] * ub) + cyc[t] * uc;
    }
}

void sq_norm_shift_avx2(double shift, const double* gx, const double* gy,
                        double* m, std::size_t n) {
    __m256d vs = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(gx + i);
        __m256d vy = _mm256_loadu_pd(gy + i);
        __m256d r = _mm256_add_pd(_mm256_add_pd(vs, _mm256_mul_pd(vx, vx)),
                                  _mm256_mul_pd(vy, vy));
        _mm256_storeu_pd(m + i, r);
    }
    for (; i < n; ++i) m[i] = (shift + gx[i] * gx[i]) + gy[i] * gy[i];
}

}  // namespace

const Backend* avx2_backend() {
    if (!__builtin_cpu_supports("avx2")) return nullptr;
    static const Backend backend{
        "avx2",      dot_avx2,      axpy_avx2,
        xpby_avx2,   hadamard_avx2, scale_avx2,
        tri_gradients_avx2, sq_norm_shift_avx2,
    };
    return &backend;
}

}  // namespace plap::kernels

#else  // !PLAP_COMPILE_AVX2

namespace plap::kernels {

const Backend* avx2_backend() { return nullptr; }

}  // namespace plap::kernels

#endif
