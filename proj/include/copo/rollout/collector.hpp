#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "copo/env/simulator.hpp"
#include "copo/rollout/nets.hpp"
#include "copo/rollout/types.hpp"
#include "copo/util/rng.hpp"

namespace copo::rollout {

struct CollectorConfig {
    int horizon = 1000;
    int batch_env_steps = 1024;
    AugmentSpec augment;
    bool feed_phi = false;        // append phi/(pi/2) to the policy input
    bool need_value_n_g = false;  // predict v_n/v_g during collection
    std::uint64_t base_seed = 0;
};

struct CollectStats {
    int env_steps = 0;
    int episodes_finished = 0;
    int n_success = 0, n_crash = 0, n_out = 0;
    int agents_done = 0;
    int sample_count = 0;
    double reward_sum = 0.0;
};

// Steps a persistent simulator until a batch worth of environmental steps
// has accumulated. Episodes outlive collect() calls: a slice that hits the
// window edge is closed as truncated-with-bootstrap while the underlying
// agent keeps driving into the next call. Each newly spawned agent draws
// one phi from N(mu, sigma^2), clamped to [-pi/2, pi/2], that sticks for
// its lifetime. The action, LCF and environment randomness run on
// separate streams of the base seed.
class Collector {
public:
    Collector(env::SceneSpec scene, env::SimConfig sim_cfg, CollectorConfig cfg);

    std::vector<CollectedEpisode> collect(const Nets& nets, double lcf_mu, double lcf_sigma,
                                          CollectStats& stats);

    // Curriculum hook: population target applied from the next spawn on.
    void set_population(int n);

    // Resume hook: continue the episode-seed sequence from episode n.
    // Only meaningful before the first collect() call.
    void set_episode_counter(std::uint64_t n) { episode_counter_ = n; }

    const env::Simulator& sim() const { return sim_; }
    std::uint64_t episodes_started() const { return episode_counter_; }

private:
    struct LiveAgent {
        double phi = 0.0, eps = 0.0;
        bool clamped = false;
        std::vector<double> obs;
        AgentEpisode slice;
    };

    void start_episode();
    void register_agent(int id, const env::Observation& obs, double mu, double sigma);
    std::vector<double> policy_input(const LiveAgent& la) const;
    std::vector<double> critic_extra(int id,
                                     const std::map<int, std::vector<double>>& tick_actions) const;
    void predict_values(const Nets& nets, const std::vector<double>& obs,
                        const std::vector<double>& extra, double* vi, double* vn,
                        double* vg) const;
    void close_slice(LiveAgent& la, env::EndReason end, const Nets* bootstrap,
                     CollectedEpisode& out);

    env::Simulator sim_;
    CollectorConfig cfg_;
    Rng act_rng_, lcf_rng_;
    std::uint64_t episode_counter_ = 0;
    int tick_ = 0;
    bool episode_open_ = false;
    std::map<int, LiveAgent> live_;
    // spawns waiting for their phi draw (reset happens before collect()
    // binds the current mu/sigma)
    std::vector<std::pair<int, env::Observation>> pending_initial_;
};

}  // namespace copo::rollout
