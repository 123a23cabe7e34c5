#pragma once

#include <string>

#include "copo/net/policy.hpp"

namespace copo::rollout {

// Critic-input augmentation for the mean-field baselines. The policy
// input is never augmented; only value heads see neighbor features.
enum class CriticAugment { none, concat_k, mean_field, mean_field_cf };

struct AugmentSpec {
    CriticAugment mode = CriticAugment::none;
    int k = 4;            // concat_k block count
    double radius = 10.0; // mean-field neighbor radius, meters

    int extra_dim(int obs_dim, int act_dim) const {
        switch (mode) {
            case CriticAugment::none: return 0;
            case CriticAugment::concat_k: return k * obs_dim;
            case CriticAugment::mean_field: return obs_dim;
            case CriticAugment::mean_field_cf: return obs_dim + act_dim;
        }
        return 0;
    }
};

// Policy plus the three value heads with their parameters. One bundle is
// shared by every agent (parameter sharing); treat it as read-only inside
// rollout code.
struct Nets {
    net::Policy policy;
    net::ValueNet value_i, value_n, value_g;
    net::ParamSet theta, eta, psi, omega;

    double value(const net::ValueNet& net, const net::ParamSet& p,
                 const std::vector<double>& input) const {
        return net.value1(p, input.data());
    }
};

}  // namespace copo::rollout
