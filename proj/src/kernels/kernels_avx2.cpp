// AVX2+FMA variants of the dense-math kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; entry happens solely through the
// dispatch table after the runtime CPU check.

#include "copo/kernels/kernels.hpp"

#if defined(COPO_HAVE_AVX2)

#include <immintrin.h>

namespace copo::kern {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void affine_avx2(const double* w, const double* x, const double* b, double* y,
                 int rows, int cols) {
    const int tail = cols & 3;
    const int main = cols - tail;
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<size_t>(r) * cols;
        __m256d acc = _mm256_setzero_pd();
        for (int c = 0; c < main; c += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), _mm256_loadu_pd(x + c), acc);
        }
        double s = hsum(acc);
        for (int c = main; c < cols; ++c) s += wr[c] * x[c];
        y[r] = b ? s + b[r] : s;
    }
}

void matvec_t_acc_avx2(const double* w, const double* dy, double* dx,
                       int rows, int cols) {
    const int tail = cols & 3;
    const int main = cols - tail;
    for (int r = 0; r < rows; ++r) {
        const double* wr = w + static_cast<size_t>(r) * cols;
        const __m256d g = _mm256_set1_pd(dy[r]);
        for (int c = 0; c < main; c += 4) {
            __m256d v = _mm256_loadu_pd(dx + c);
            v = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), g, v);
            _mm256_storeu_pd(dx + c, v);
        }
        for (int c = main; c < cols; ++c) dx[c] += wr[c] * dy[r];
    }
}

void ger_acc_avx2(double* dw, const double* dy, const double* x,
                  int rows, int cols) {
    const int tail = cols & 3;
    const int main = cols - tail;
    for (int r = 0; r < rows; ++r) {
        double* dwr = dw + static_cast<size_t>(r) * cols;
        const __m256d g = _mm256_set1_pd(dy[r]);
        for (int c = 0; c < main; c += 4) {
            __m256d v = _mm256_loadu_pd(dwr + c);
            v = _mm256_fmadd_pd(g, _mm256_loadu_pd(x + c), v);
            _mm256_storeu_pd(dwr + c, v);
        }
        for (int c = main; c < cols; ++c) dwr[c] += dy[r] * x[c];
    }
}

void axpy_avx2(double a, const double* x, double* y, int n) {
    const int tail = n & 3;
    const int main = n - tail;
    const __m256d va = _mm256_set1_pd(a);
    for (int i = 0; i < main; i += 4) {
        __m256d v = _mm256_loadu_pd(y + i);
        v = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), v);
        _mm256_storeu_pd(y + i, v);
    }
    for (int i = main; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(const double* a, const double* b, int n) {
    const int tail = n & 3;
    const int main = n - tail;
    __m256d acc = _mm256_setzero_pd();
    for (int i = 0; i < main; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum(acc);
    for (int i = main; i < n; ++i) s += a[i] * b[i];
    return s;
}

constexpr Kernels kAvx2{
    "avx2", affine_avx2, matvec_t_acc_avx2, ger_acc_avx2, axpy_avx2, dot_avx2,
};

}  // namespace

bool avx2_available() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels& avx2_kernels() {
    return avx2_available() ? kAvx2 : scalar_kernels();
}

}  // namespace copo::kern

#endif  // COPO_HAVE_AVX2
