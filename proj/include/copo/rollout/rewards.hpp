#pragma once

#include "copo/rollout/types.hpp"

namespace copo::rollout {

// r_neighborhood of each record := mean individual reward of the other
// agents within `radius` (center distance) at the same step; 0 when the
// neighborhood is empty. Spatial-hash broad phase.
void fill_neighborhood_rewards(CollectedEpisode& episode, double radius);

// O(k^2) reference used by the oracle tests; must match the hash-based
// version bit for bit (both accumulate in ascending agent-id order).
void fill_neighborhood_rewards_brute(CollectedEpisode& episode, double radius);

// r_global of every record at step t := mean individual reward over all
// agents active at t.
void fill_global_rewards(CollectedEpisode& episode);

// The two sides of the global-objective factorization: the sum of
// per-agent global returns and the sum of per-step reward totals.
double sum_global_returns(const CollectedEpisode& episode);
double sum_step_rewards(const CollectedEpisode& episode);

}  // namespace copo::rollout
