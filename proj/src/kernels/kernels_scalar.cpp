#include "plap/kernels.hpp"

namespace plap::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby_scalar(const double* x, double b, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void hadamard_scalar(const double* x, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] * y[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void tri_gradients_scalar(std::size_t ntri, const std::int32_t* ia,
                          const std::int32_t* ib, const std::int32_t* ic,
                          const double* cxa, const double* cxb, const double* cxc,
                          const double* cya, const double* cyb, const double* cyc,
                          const double* u, double* gx, double* gy) {
    for (std::size_t t = 0; t < ntri; ++t) {
        double ua = u[ia[t]], ub = u[ib[t]], uc = u[ic[t]];
        gx[t] = (cxa[t] * ua + cxb[t] * ub) + cxc[t] * uc;
        gy[t] = (cya[t] * ua + cyb[t] * ub) + cyc[t] * uc;
    }
}

void sq_norm_shift_scalar(double shift, const double* gx, const double* gy,
                          double* m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = (shift + gx[i] * gx[i]) + gy[i] * gy[i];
    }
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend backend{
        "scalar",        dot_scalar,   axpy_scalar,
        xpby_scalar,     hadamard_scalar, scale_scalar,
        tri_gradients_scalar, sq_norm_shift_scalar,
    };
    return backend;
}

}  // namespace plap::kernels
