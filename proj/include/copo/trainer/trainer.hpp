#pragma once

#include <cstdint>
#include <string>

#include "copo/env/scene.hpp"
#include "copo/net/adam.hpp"
#include "copo/rollout/collector.hpp"
#include "copo/trainer/config.hpp"
#include "copo/trainer/lcf.hpp"

namespace copo::trainer {

// Initial agent count for the growing-population baseline: 25/50/75/100%
// of the target across four equal phases (rounded up, never decreasing).
int curriculum_population(int iteration, int total_iterations, int target);

struct IterationStats {
    int iteration = 0;
    long long env_steps = 0;  // cumulative
    double success_rate = 0.0;
    double efficiency = 0.0;
    double safety = 0.0;  // crashes in this batch
    double mean_kl = 0.0;
    double clip_frac = 0.0;
    double phi_mu = 0.0;
    double phi_sigma = 0.0;
    double policy_loss = 0.0;
    double value_loss_i = 0.0;
    double value_loss_n = 0.0;
    double value_loss_g = 0.0;
    double lcf_objective = 0.0;
    double mean_step_reward = 0.0;
    int samples = 0;

    static std::string csv_header();
    std::string csv_row() const;
};

// One seed's training state: nets, optimizers, the coordination-angle
// distribution, and a persistent collector. train_iteration runs the full
// Algorithm-1 cycle (snapshot -> collect -> advantages -> policy/value
// epochs -> LCF epochs for copo).
class Trainer {
public:
    Trainer(env::SceneSpec scene, const RunConfig& cfg, std::uint64_t seed);

    IterationStats train_iteration();

    bool finished() const { return env_steps_ >= cfg_.max_env_steps; }
    int iteration() const { return iter_; }
    long long env_steps() const { return env_steps_; }
    int total_iterations() const;

    const RunConfig& config() const { return cfg_; }
    const rollout::Nets& nets() const { return nets_; }
    rollout::Nets& nets() { return nets_; }
    const LcfDistribution& lcf() const { return lcf_; }
    LcfDistribution& lcf() { return lcf_; }

    void save_checkpoint(const std::string& path) const;
    // Restores nets, optimizer moments, the LCF state and the progress
    // counters. The environment itself restarts fresh; the episode-seed
    // sequence continues where the saved run left off.
    void load_checkpoint(const std::string& path);

private:
    RunConfig cfg_;
    std::uint64_t seed_ = 0;
    rollout::AugmentSpec augment_;
    int scene_target_ = 0;
    rollout::Collector collector_;
    rollout::Nets nets_;
    net::Adam opt_theta_, opt_eta_, opt_psi_, opt_omega_;
    LcfDistribution lcf_;
    long long env_steps_ = 0;
    int iter_ = 0;
};

}  // namespace copo::trainer
