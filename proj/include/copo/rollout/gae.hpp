#pragma once

#include "copo/rollout/types.hpp"

namespace copo::rollout {

// Standard generalized advantage estimation over one reward/value track:
// delta_t = r_t + gamma*V_{t+1} - V_t, A_t = delta_t + gamma*lambda*A_{t+1},
// with v_last standing in for V_T (zero on terminal states, the predicted
// value on truncation). targets[t] = adv[t] + v[t].
void compute_gae(const double* r, const double* v, int n, double v_last, double gamma,
                 double lambda, double* adv, double* target);

// Runs the recursion for the individual, neighborhood and global streams
// of every agent slice. gamma_in covers individual+neighborhood.
void fill_advantages(CollectedEpisode& episode, double gamma_in, double gamma_global,
                     double lambda);

}  // namespace copo::rollout
