#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "copo/net/params.hpp"
#include "copo/net/policy.hpp"
#include "copo/rollout/batch.hpp"
#include "copo/util/geom.hpp"

namespace copo::trainer {

// Gaussian over the coordination angle φ. Draws are clamped to
// [-π/2, π/2]; σ is kept in [1e-3, 1] so the distribution never collapses
// or blows up.
struct LcfDistribution {
    double mu = 0.0;
    double sigma = 0.1;

    static constexpr double kSigmaMin = 1e-3;
    static constexpr double kSigmaMax = 1.0;

    void clamp() {
        mu = std::clamp(mu, -0.5 * kPi, 0.5 * kPi);
        sigma = std::clamp(sigma, kSigmaMin, kSigmaMax);
    }
    double sample(double eps) const {
        return std::clamp(mu + sigma * eps, -0.5 * kPi, 0.5 * kPi);
    }
};

inline double coordinated_advantage(double adv_i, double adv_n, double phi) {
    return std::cos(phi) * adv_i + std::sin(phi) * adv_n;
}

// Per-row scalars p_k = g1 · ∇_{θ_old} log π_{θ_old}(a_k | o_k), where g1
// is the gradient of the clipped global-advantage surrogate at the
// updated policy. Computing them is the expensive part of the φ update
// and is independent of (φ_mu, φ_sigma), so it happens once per
// iteration; the φ-dependence re-enters by re-deriving each agent's φ
// from its stored ε draw.
struct LcfWorkspace {
    std::vector<double> p;
    double surrogate = 0.0;  // value of the global surrogate at θ_new
};

LcfWorkspace lcf_prepare(const net::Policy& policy, const net::ParamSet& theta_old,
                         const net::ParamSet& theta_new, const rollout::SampleBatch& batch,
                         double clip_eps, bool feed_phi);

struct LcfGradient {
    double d_mu = 0.0;
    double d_sigma = 0.0;
};

// Gradient of the bilevel objective w.r.t. (φ_mu, φ_sigma) at `dist`,
// with φ_k = clamp(mu + sigma ε_k). Rows whose draw hit the clamp
// contribute zero (the clamp blocks the pathwise derivative) but still
// count toward the mean.
LcfGradient lcf_gradient(const LcfWorkspace& ws, const rollout::SampleBatch& batch,
                         const LcfDistribution& dist);

// kphi plain gradient-ascent steps (no momentum), re-deriving the draws
// and re-clamping after every step.
void lcf_ascend(LcfDistribution& dist, const LcfWorkspace& ws, const rollout::SampleBatch& batch,
                int kphi, double lcf_lr);

}  // namespace copo::trainer
