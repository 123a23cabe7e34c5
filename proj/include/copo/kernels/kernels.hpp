#pragma once

#include <string>

namespace copo::kern {

// Inner loops of the dense-network math, double precision. The scalar
// versions are the reference semantics; vector backends must agree with
// them to tight relative tolerance (exercised by the equivalence tests).
struct Kernels {
    const char* name;

    // y = W x (+ b when b != nullptr); W is row-major rows x cols.
    void (*affine)(const double* w, const double* x, const double* b, double* y,
                   int rows, int cols);
    // dx += W^T dy
    void (*matvec_t_acc)(const double* w, const double* dy, double* dx,
                         int rows, int cols);
    // dW += dy x^T
    void (*ger_acc)(double* dw, const double* dy, const double* x,
                    int rows, int cols);
    // y += a x
    void (*axpy)(double a, const double* x, double* y, int n);
    double (*dot)(const double* a, const double* b, int n);
};

enum class Backend { auto_detect, scalar, avx2 };

const Kernels& scalar_kernels();

// True when the host CPU supports AVX2+FMA and the backend was compiled in.
bool avx2_available();

// AVX2 backend; falls back to the scalar table when unavailable.
const Kernels& avx2_kernels();

// The backend in force: auto-detect picks AVX2 when available.
const Kernels& active();

void set_backend(Backend b);
Backend backend();
Backend parse_backend(const std::string& name);  // "auto" | "scalar" | "avx2"

}  // namespace copo::kern
