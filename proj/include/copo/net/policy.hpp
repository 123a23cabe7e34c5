#pragma once

#include <algorithm>
#include <vector>

#include "copo/net/gaussian.hpp"
#include "copo/net/mlp.hpp"
#include "copo/util/rng.hpp"

namespace copo::net {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

inline double clamp_log_std(double raw) { return std::clamp(raw, kLogStdMin, kLogStdMax); }

// Gaussian policy head over an Mlp mean net plus the ParamSet's free
// log-std block. The clamp acts like a stop-gradient outside [-5, 2]:
// saturated entries receive zero gradient.
struct Policy {
    Mlp mlp;

    explicit Policy(MlpShape shape) : mlp(std::move(shape)) {}
    Policy() = default;

    int action_dim() const { return mlp.shape().output; }

    // mean and clamped log-std for one observation
    void head1(const ParamSet& p, const double* obs, double* mean, double* log_std) const {
        mlp.forward1(p, obs, mean);
        const double* raw = p.log_std();
        for (int i = 0; i < action_dim(); ++i) log_std[i] = clamp_log_std(raw[i]);
    }

    // Draws action = mean + std ⊙ ε and returns log p of the raw draw.
    // The caller is responsible for any command clamping in the env.
    double sample1(const ParamSet& p, const double* obs, Rng& rng, double* action,
                   double* mean, double* log_std) const {
        head1(p, obs, mean, log_std);
        for (int i = 0; i < action_dim(); ++i) {
            action[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
        }
        return gauss_log_prob(mean, log_std, action, action_dim());
    }
};

// Scalar-output value net helper.
struct ValueNet {
    Mlp mlp;

    explicit ValueNet(MlpShape shape) : mlp(std::move(shape)) {}
    ValueNet() = default;

    double value1(const ParamSet& p, const double* obs) const {
        double v = 0.0;
        mlp.forward1(p, obs, &v);
        return v;
    }
};

}  // namespace copo::net
