#pragma once

#include <cstdint>
#include <vector>

#include "copo/env/vehicle.hpp"
#include "copo/util/geom.hpp"

namespace copo::rollout {

// One agent-step. `obs` and `position` describe the state the action was
// taken from; the rewards describe the transition it caused. The behavior
// distribution is stored in full so later epochs can compute exact KL
// against it.
struct TransitionRecord {
    int agent_id = -1;
    int step = 0;  // environmental step index within the episode

    std::vector<double> obs;
    std::vector<double> critic_extra;  // neighbor-feature block, critic input only
    std::vector<double> action;        // raw sample, before command clamping
    std::vector<double> behavior_mean;
    std::vector<double> behavior_log_std;
    double log_prob_behavior = 0.0;

    double r_individual = 0.0;
    double r_neighborhood = 0.0;
    double r_global = 0.0;
    bool done = false;

    double v_i = 0.0, v_n = 0.0, v_g = 0.0;

    double lcf_phi = 0.0;  // radians, fixed over the agent's lifetime
    double lcf_eps = 0.0;  // the standard-normal draw behind phi
    bool lcf_clamped = false;

    Vec2 position;
};

// Contiguous slice of one agent's lifetime. Slices end either because the
// agent terminated (end reason set, bootstraps zero) or because the
// collection window closed first (truncated; bootstraps carry the value
// predictions at the next observation).
struct AgentEpisode {
    int agent_id = -1;
    std::vector<TransitionRecord> steps;
    env::EndReason end = env::EndReason::none;
    double bootstrap_v_i = 0.0, bootstrap_v_n = 0.0, bootstrap_v_g = 0.0;

    bool truncated() const { return end == env::EndReason::truncated; }

    // filled by the advantage pass, aligned with `steps`
    std::vector<double> adv_i, adv_n, adv_g;
    std::vector<double> tgt_i, tgt_n, tgt_g;
};

// All agent slices drawn from one environmental episode (or the part of
// it that fell into this collection window). Per-step reward pools are
// complete: every agent active at a covered step has a record there.
struct CollectedEpisode {
    std::vector<AgentEpisode> agents;
    int first_step = 0;  // smallest step index covered
    int step_count = 0;  // number of ticks covered
};

}  // namespace copo::rollout
