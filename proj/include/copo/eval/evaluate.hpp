#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copo/env/scene.hpp"
#include "copo/eval/idm.hpp"
#include "copo/eval/metrics.hpp"
#include "copo/net/policy.hpp"

namespace copo::eval {

struct EvalConfig {
    int n_episodes = 5;
    int horizon = 1000;
    std::uint64_t seed = 0;
    int initial_agents = 0;     // 0 = scene target
    double idm_fraction = 0.0;  // [0, 1): share of spawns handed to the heuristic
    int workers = 1;
    bool record = false;  // keep per-step positions for plotting
    IdmConfig idm;
};

struct TrajPoint {
    int episode = 0;
    int step = 0;
    int agent_id = 0;
    int spawn_group = 0;  // index of the spawn point the agent entered from
    double x = 0.0, y = 0.0;
    bool crash = false;
};

struct EvalResult {
    EpisodeMetrics aggregate;
    std::vector<EpisodeMetrics> per_episode;
    std::vector<TrajPoint> points;  // empty unless cfg.record
};

// Runs n_episodes deterministic episodes — the policy drives with its
// mean action, no sampling — and folds the tallies. idm_fraction hands a
// deterministic share of spawns to the IDM controller; metrics then cover
// the learned agents only. Episodes are seed-partitioned and folded in
// episode order, so the worker count never changes the result.
EvalResult evaluate(const env::SceneSpec& scene, const net::Policy& policy,
                    const net::ParamSet& theta, bool feed_phi, double phi,
                    const EvalConfig& cfg);

void write_trajectories(const std::vector<TrajPoint>& pts, const std::string& path);
std::vector<TrajPoint> read_trajectories(const std::string& path);

}  // namespace copo::eval
