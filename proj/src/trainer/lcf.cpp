#include "copo/trainer/lcf.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "copo/net/gaussian.hpp"
#include "copo/trainer/losses.hpp"

namespace copo::trainer {
namespace {

// Full-batch passes are chunked so layer caches stay bounded even when a
// batch holds tens of thousands of transitions.
constexpr int kChunk = 8192;

}  // namespace

LcfWorkspace lcf_prepare(const net::Policy& policy, const net::ParamSet& theta_old,
                         const net::ParamSet& theta_new, const rollout::SampleBatch& batch,
                         double clip_eps, bool feed_phi) {
    const int total = batch.count;
    const int ad = batch.act_dim;
    const double inv_total = 1.0 / total;

    LcfWorkspace ws;
    ws.p.assign(total, 0.0);

    std::vector<int> rows(total);
    for (int i = 0; i < total; ++i) rows[i] = i;

    std::vector<double> ls_new(ad), ls_old(ad);
    const double* raw_new = theta_new.log_std();
    const double* raw_old = theta_old.log_std();
    for (int i = 0; i < ad; ++i) {
        ls_new[i] = net::clamp_log_std(raw_new[i]);
        ls_old[i] = net::clamp_log_std(raw_old[i]);
    }

    // g1 = ∇_{θ_new} mean_k min(ρ_k A^G_k, clip(ρ_k) A^G_k)
    net::ParamSet g1(policy.mlp.shape());
    g1.zero();
    {
        std::vector<double> dls(ad, 0.0);
        std::vector<double> x, dmean;
        net::MlpCache cache;
        for (int begin = 0; begin < total; begin += kChunk) {
            const int n = std::min(kChunk, total - begin);
            gather_policy_rows(batch, rows.data() + begin, n, feed_phi, x);
            policy.mlp.forward(theta_new, x.data(), n, cache);
            const std::vector<double>& mean = cache.act.back();
            dmean.assign(static_cast<size_t>(n) * ad, 0.0);
            for (int k = 0; k < n; ++k) {
                const int r = begin + k;
                const double* mu = mean.data() + static_cast<size_t>(k) * ad;
                const double* act = batch.action.data() + static_cast<size_t>(r) * ad;
                const double lp = net::gauss_log_prob(mu, ls_new.data(), act, ad);
                const double ratio = std::exp(lp - batch.log_prob_behavior[r]);
                if (!std::isfinite(ratio))
                    throw std::runtime_error("non-finite importance ratio at batch row " +
                                             std::to_string(r));
                const double a = batch.adv_g[r];
                const double unclipped = ratio * a;
                const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a;
                double dj_dlp = 0.0;
                if (unclipped <= clipped) {
                    ws.surrogate += unclipped * inv_total;
                    dj_dlp = ratio * a;
                } else {
                    ws.surrogate += clipped * inv_total;
                }
                net::gauss_log_prob_grad(mu, ls_new.data(), act, ad, dj_dlp * inv_total,
                                         dmean.data() + static_cast<size_t>(k) * ad, dls.data());
            }
            policy.mlp.backward(theta_new, x.data(), n, cache, dmean.data(), g1);
        }
        double* gls = g1.log_std();
        for (int i = 0; i < ad; ++i)
            if (raw_new[i] >= net::kLogStdMin && raw_new[i] <= net::kLogStdMax) gls[i] += dls[i];
    }

    // p_k = directional derivative of log π_{θ_old}(a_k|o_k) along g1,
    // i.e. g1 · s_k without ever materializing the per-sample gradient.
    {
        std::vector<double> ls_dot(ad, 0.0);
        const double* g1_ls = g1.log_std();
        for (int i = 0; i < ad; ++i)
            if (raw_old[i] >= net::kLogStdMin && raw_old[i] <= net::kLogStdMax)
                ls_dot[i] = g1_ls[i];

        std::vector<double> x, mean_dot;
        net::MlpCache cache;
        for (int begin = 0; begin < total; begin += kChunk) {
            const int n = std::min(kChunk, total - begin);
            gather_policy_rows(batch, rows.data() + begin, n, feed_phi, x);
            policy.mlp.forward(theta_old, x.data(), n, cache);
            const std::vector<double>& mean = cache.act.back();
            policy.mlp.jvp(theta_old, g1, x.data(), n, cache, mean_dot);
            for (int k = 0; k < n; ++k) {
                const int r = begin + k;
                ws.p[r] = net::gauss_log_prob_jvp(
                    mean.data() + static_cast<size_t>(k) * ad, ls_old.data(),
                    batch.action.data() + static_cast<size_t>(r) * ad, ad,
                    mean_dot.data() + static_cast<size_t>(k) * ad, ls_dot.data());
            }
        }
    }

    return ws;
}

LcfGradient lcf_gradient(const LcfWorkspace& ws, const rollout::SampleBatch& batch,
                         const LcfDistribution& dist) {
    const int total = batch.count;
    const double inv_total = 1.0 / total;
    LcfGradient g;
    const double half_pi = 0.5 * kPi;
    for (int r = 0; r < total; ++r) {
        const double eps = batch.lcf_eps[r];
        const double raw = dist.mu + dist.sigma * eps;
        if (raw < -half_pi || raw > half_pi) continue;  // clamp blocks the derivative
        const double c =
            -std::sin(raw) * batch.adv_i[r] + std::cos(raw) * batch.adv_n[r];
        const double pc = ws.p[r] * c * inv_total;
        g.d_mu += pc;
        g.d_sigma += pc * eps;
    }
    return g;
}

void lcf_ascend(LcfDistribution& dist, const LcfWorkspace& ws, const rollout::SampleBatch& batch,
                int kphi, double lcf_lr) {
    for (int step = 0; step < kphi; ++step) {
        const LcfGradient g = lcf_gradient(ws, batch, dist);
        if (!std::isfinite(g.d_mu) || !std::isfinite(g.d_sigma)) {
            std::fprintf(stderr, "warning: skipped non-finite coordination-factor gradient\n");
            continue;
        }
        dist.mu += lcf_lr * g.d_mu;
        dist.sigma += lcf_lr * g.d_sigma;
        dist.clamp();
    }
}

}  // namespace copo::trainer
