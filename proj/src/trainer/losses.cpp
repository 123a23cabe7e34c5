#include "copo/trainer/losses.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "copo/net/gaussian.hpp"
#include "copo/util/geom.hpp"

namespace copo::trainer {

using copo::kPi;

void gather_policy_rows(const rollout::SampleBatch& batch, const int* idx, int n, bool feed_phi,
                        std::vector<double>& x) {
    const int od = batch.obs_dim;
    const int in = od + (feed_phi ? 1 : 0);
    x.resize(static_cast<size_t>(n) * in);
    for (int k = 0; k < n; ++k) {
        const int r = idx[k];
        std::memcpy(x.data() + static_cast<size_t>(k) * in, batch.obs.data() + static_cast<size_t>(r) * od,
                    sizeof(double) * od);
        if (feed_phi) x[static_cast<size_t>(k) * in + od] = batch.lcf_phi[r] / (0.5 * kPi);
    }
}

void gather_value_rows(const rollout::SampleBatch& batch, const int* idx, int n, bool with_extra,
                       std::vector<double>& x) {
    const int od = batch.obs_dim;
    const int ed = with_extra ? batch.extra_dim : 0;
    const int in = od + ed;
    x.resize(static_cast<size_t>(n) * in);
    for (int k = 0; k < n; ++k) {
        const int r = idx[k];
        double* row = x.data() + static_cast<size_t>(k) * in;
        std::memcpy(row, batch.obs.data() + static_cast<size_t>(r) * od, sizeof(double) * od);
        if (ed > 0)
            std::memcpy(row + od, batch.extra.data() + static_cast<size_t>(r) * batch.extra_dim,
                        sizeof(double) * ed);
    }
}

PolicyLossStats ppo_policy_loss(const net::Policy& policy, const net::ParamSet& theta,
                                const rollout::SampleBatch& batch, const int* idx, int n,
                                const double* adv, double clip_eps, double kl_coeff,
                                double entropy_coeff, bool feed_phi, net::ParamSet& grad) {
    const int ad = batch.act_dim;
    if (policy.action_dim() != ad) throw std::invalid_argument("policy/batch action dim mismatch");

    std::vector<double> x;
    gather_policy_rows(batch, idx, n, feed_phi, x);

    net::MlpCache cache;
    policy.mlp.forward(theta, x.data(), n, cache);
    const std::vector<double>& mean = cache.act.back();

    std::vector<double> ls(ad);
    const double* raw_ls = theta.log_std();
    for (int i = 0; i < ad; ++i) ls[i] = net::clamp_log_std(raw_ls[i]);

    PolicyLossStats stats;
    stats.entropy = net::gauss_entropy(ls.data(), ad);

    std::vector<double> dmean(static_cast<size_t>(n) * ad, 0.0);
    std::vector<double> dls(ad, 0.0);
    const double inv_n = 1.0 / n;
    int clipped = 0;

    for (int k = 0; k < n; ++k) {
        const int r = idx[k];
        const double* mu = mean.data() + static_cast<size_t>(k) * ad;
        const double* act = batch.action.data() + static_cast<size_t>(r) * ad;
        const double* bmu = batch.behavior_mean.data() + static_cast<size_t>(r) * ad;
        const double* bls = batch.behavior_log_std.data() + static_cast<size_t>(r) * ad;

        const double lp_new = net::gauss_log_prob(mu, ls.data(), act, ad);
        const double ratio = std::exp(lp_new - batch.log_prob_behavior[r]);
        if (!std::isfinite(ratio))
            throw std::runtime_error("non-finite importance ratio at batch row " +
                                     std::to_string(r));

        const double a = adv[r];
        const double unclipped = ratio * a;
        const double clipped_v =
            std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a;

        double dsurr_dlp;  // d(min term)/d(lp_new)
        if (unclipped <= clipped_v) {
            stats.surrogate += unclipped * inv_n;
            dsurr_dlp = ratio * a;  // dρ/dlp = ρ
        } else {
            stats.surrogate += clipped_v * inv_n;
            dsurr_dlp = 0.0;  // clip saturated: constant in θ
            ++clipped;
        }

        double* dmu = dmean.data() + static_cast<size_t>(k) * ad;
        // loss = -mean(surr): d(loss)/d(lp) = -dsurr/n
        net::gauss_log_prob_grad(mu, ls.data(), act, ad, -dsurr_dlp * inv_n, dmu, dls.data());

        stats.mean_kl += net::gauss_kl(bmu, bls, mu, ls.data(), ad) * inv_n;
        if (kl_coeff != 0.0)
            net::gauss_kl_grad_q(bmu, bls, mu, ls.data(), ad, kl_coeff * inv_n, dmu, dls.data());
    }

    // entropy bonus is state-independent for a free log-std head, so the
    // batch mean equals the per-sample value
    if (entropy_coeff != 0.0)
        for (int i = 0; i < ad; ++i) dls[i] -= entropy_coeff;

    policy.mlp.backward(theta, x.data(), n, cache, dmean.data(), grad);
    double* gls = grad.log_std();
    for (int i = 0; i < ad; ++i) {
        if (raw_ls[i] >= net::kLogStdMin && raw_ls[i] <= net::kLogStdMax) gls[i] += dls[i];
    }

    stats.clip_frac = static_cast<double>(clipped) * inv_n;
    stats.loss = -stats.surrogate + kl_coeff * stats.mean_kl - entropy_coeff * stats.entropy;
    return stats;
}

double value_loss(const net::ValueNet& vnet, const net::ParamSet& p,
                  const rollout::SampleBatch& batch, const int* idx, int n, const double* target,
                  bool with_extra, net::ParamSet& grad) {
    std::vector<double> x;
    gather_value_rows(batch, idx, n, with_extra, x);

    net::MlpCache cache;
    vnet.mlp.forward(p, x.data(), n, cache);
    const std::vector<double>& v = cache.act.back();

    const double inv_n = 1.0 / n;
    double loss = 0.0;
    std::vector<double> dv(n);
    for (int k = 0; k < n; ++k) {
        const double d = v[k] - target[idx[k]];
        loss += 0.5 * d * d * inv_n;
        dv[k] = d * inv_n;
    }
    vnet.mlp.backward(p, x.data(), n, cache, dv.data(), grad);
    return loss;
}

}  // namespace copo::trainer
