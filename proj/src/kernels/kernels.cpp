#include "copo/kernels/kernels.hpp"

#include <stdexcept>

namespace copo::kern {

namespace {

void affine_scalar(const double* w, const double* x, const double* b, double* y,
                   int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<size_t>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = b ? acc + b[r] : acc;
    }
}

void matvec_t_acc_scalar(const double* w, const double* dy, double* dx,
                         int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<size_t>(r) * cols;
        const double g = dy[r];
        for (int c = 0; c < cols; ++c) dx[c] += wr[c] * g;
    }
}

void ger_acc_scalar(double* dw, const double* dy, const double* x,
                    int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double* dwr = dw + static_cast<size_t>(r) * cols;
        const double g = dy[r];
        for (int c = 0; c < cols; ++c) dwr[c] += g * x[c];
    }
}

void axpy_scalar(double a, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

constexpr Kernels kScalar{
    "scalar", affine_scalar, matvec_t_acc_scalar, ger_acc_scalar,
    axpy_scalar, dot_scalar,
};

Backend g_backend = Backend::auto_detect;

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

#if !defined(COPO_HAVE_AVX2)
bool avx2_available() { return false; }
const Kernels& avx2_kernels() { return kScalar; }
#endif

const Kernels& active() {
    switch (g_backend) {
        case Backend::scalar:
            return scalar_kernels();
        case Backend::avx2:
            return avx2_kernels();
        case Backend::auto_detect:
        default:
            return avx2_available() ? avx2_kernels() : scalar_kernels();
    }
}

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_available()) {
        throw std::runtime_error("avx2 kernels requested but not available on this CPU");
    }
    g_backend = b;
}

Backend backend() { return g_backend; }

Backend parse_backend(const std::string& name) {
    if (name == "auto") return Backend::auto_detect;
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    throw std::runtime_error("unknown kernel backend: " + name);
}

}  // namespace copo::kern
