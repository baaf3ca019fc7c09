#pragma once

#include <cstddef>
#include <cstdint>

namespace plap::kernels {

/// Data-parallel inner loops used by assembly and the CG solver.
///
/// Every backend implements the same contract. Elementwise operations
/// (axpy, xpby, hadamard, scale, tri_gradients, sq_norm_shift) are
/// bit-identical across backends: they perform the same IEEE operations in
/// the same per-element order. Reductions (dot) may reassociate into a
/// fixed number of lanes and agree with the scalar backend to roundoff.
struct Backend {
    const char* name;

    /// sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);

    /// y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    /// y[i] = x[i] + b * y[i]
    void (*xpby)(const double* x, double b, double* y, std::size_t n);

    /// z[i] = x[i] * y[i]
    void (*hadamard)(const double* x, const double* y, double* z, std::size_t n);

    /// x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);

    /// Batched P1 gradients: for each triangle t,
    ///   gx[t] = cxa[t]*u[ia[t]] + cxb[t]*u[ib[t]] + cxc[t]*u[ic[t]]
    /// and likewise gy from cya/cyb/cyc, evaluated in exactly that
    /// association order.
    void (*tri_gradients)(std::size_t ntri, const std::int32_t* ia,
                          const std::int32_t* ib, const std::int32_t* ic,
                          const double* cxa, const double* cxb, const double* cxc,
                          const double* cya, const double* cyb, const double* cyc,
                          const double* u, double* gx, double* gy);

    /// m[i] = shift + gx[i]*gx[i] + gy[i]*gy[i]
    void (*sq_norm_shift)(double shift, const double* gx, const double* gy,
                          double* m, std::size_t n);
};

/// The scalar reference backend (always available).
const Backend& scalar_backend();

/// The AVX2 backend, or nullptr when unsupported (compile- or run-time).
const Backend* avx2_backend();

/// Backend in use. Chosen once: PLAP_KERNEL=scalar|avx2|auto overrides,
/// otherwise the best backend the CPU supports.
const Backend& active();

/// Force a backend by name ("scalar", "avx2", "auto"); returns false if the
/// request cannot be honored. Intended for tests and the CLI.
bool select(const char* name);

}  // namespace plap::kernels
