#pragma once

#include "copo/net/params.hpp"
#include "copo/net/policy.hpp"
#include "copo/rollout/batch.hpp"

namespace copo::trainer {

struct PolicyLossStats {
    double loss = 0.0;       // -surrogate + kl_coeff*KL - entropy_coeff*H
    double surrogate = 0.0;  // mean clipped objective (ascent direction)
    double mean_kl = 0.0;    // mean KL(behavior || current)
    double clip_frac = 0.0;  // fraction of samples on the clipped branch
    double entropy = 0.0;
};

// Clipped importance-ratio objective with a KL(behavior || current)
// penalty and optional entropy bonus, over batch rows idx[0..n). `adv`
// holds one advantage per batch row (indexed by row, not by k).
// Accumulates dLoss/dparams into grad; log-std entries saturated against
// the clamp get zero gradient. Throws if a ratio goes non-finite, naming
// the offending row.
PolicyLossStats ppo_policy_loss(const net::Policy& policy, const net::ParamSet& theta,
                                const rollout::SampleBatch& batch, const int* idx, int n,
                                const double* adv, double clip_eps, double kl_coeff,
                                double entropy_coeff, bool feed_phi, net::ParamSet& grad);

// 1/n Σ ½ (v(x_k) - target_k)². Input rows are obs, or obs ++ extra when
// with_extra is set. Accumulates gradients into grad, returns the loss.
double value_loss(const net::ValueNet& vnet, const net::ParamSet& p,
                  const rollout::SampleBatch& batch, const int* idx, int n, const double* target,
                  bool with_extra, net::ParamSet& grad);

// Row gatherers shared by the losses and the coordination-factor update.
// Policy rows optionally append the agent's phi scaled by 2/pi.
void gather_policy_rows(const rollout::SampleBatch& batch, const int* idx, int n, bool feed_phi,
                        std::vector<double>& x);
void gather_value_rows(const rollout::SampleBatch& batch, const int* idx, int n, bool with_extra,
                       std::vector<double>& x);

}  // namespace copo::trainer
