#pragma once

#include <cmath>

namespace copo::net {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Diagonal Gaussians parameterized by mean m and log-std ls, length n.

inline double gauss_log_prob(const double* m, const double* ls, const double* a, int n) {
    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = (a[i] - m[i]) * std::exp(-ls[i]);
        lp += -0.5 * z * z - ls[i] - 0.5 * kLog2Pi;
    }
    return lp;
}

// Accumulates scale * d(log p)/d(mean) and scale * d(log p)/d(log-std).
inline void gauss_log_prob_grad(const double* m, const double* ls, const double* a, int n,
                                double scale, double* dm, double* dls) {
    for (int i = 0; i < n; ++i) {
        const double inv_var = std::exp(-2.0 * ls[i]);
        const double diff = a[i] - m[i];
        dm[i] += scale * diff * inv_var;
        dls[i] += scale * (diff * diff * inv_var - 1.0);
    }
}

// Directional derivative of log p along (m_dot, ls_dot).
inline double gauss_log_prob_jvp(const double* m, const double* ls, const double* a, int n,
                                 const double* m_dot, const double* ls_dot) {
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double inv_var = std::exp(-2.0 * ls[i]);
        const double diff = a[i] - m[i];
        d += m_dot[i] * diff * inv_var + ls_dot[i] * (diff * diff * inv_var - 1.0);
    }
    return d;
}

// KL(p || q) in closed form.
inline double gauss_kl(const double* mp, const double* lsp, const double* mq, const double* lsq,
                       int n) {
    double kl = 0.0;
    for (int i = 0; i < n; ++i) {
        const double var_p = std::exp(2.0 * lsp[i]);
        const double inv_var_q = std::exp(-2.0 * lsq[i]);
        const double diff = mp[i] - mq[i];
        kl += lsq[i] - lsp[i] + 0.5 * (var_p + diff * diff) * inv_var_q - 0.5;
    }
    return kl;
}

// Accumulates scale * d KL(p || q) / d(mq, lsq) — gradients w.r.t. the
// second (new-policy) distribution only.
inline void gauss_kl_grad_q(const double* mp, const double* lsp, const double* mq,
                            const double* lsq, int n, double scale, double* dmq, double* dlsq) {
    for (int i = 0; i < n; ++i) {
        const double var_p = std::exp(2.0 * lsp[i]);
        const double inv_var_q = std::exp(-2.0 * lsq[i]);
        const double diff = mq[i] - mp[i];
        dmq[i] += scale * diff * inv_var_q;
        dlsq[i] += scale * (1.0 - (var_p + diff * diff) * inv_var_q);
    }
}

inline double gauss_entropy(const double* ls, int n) {
    double h = 0.5 * n * (kLog2Pi + 1.0);
    for (int i = 0; i < n; ++i) h += ls[i];
    return h;
}

}  // namespace copo::net
