#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "copo/env/scene.hpp"
#include "copo/env/vehicle.hpp"
#include "copo/util/rng.hpp"

namespace copo::env {

struct Observation {
    static constexpr int kEgoDim = 5;
    static constexpr int kNavDim = 4;
    static constexpr int kLidarRays = 72;
    static constexpr int kDim = kEgoDim + kNavDim + kLidarRays;

    std::vector<double> data;
};

struct SimConfig {
    double dt = 0.2;
    VehicleParams vehicle;
    double lidar_range = 40.0;
    int dead_body_steps = 10;     // terminated vehicles block traffic this long
    double progress_gain = 1.0;   // reward per meter of longitudinal progress
    double success_bonus = 10.0;
    double failure_penalty = 5.0;
    double checkpoint_dist = 10.0;  // lookahead along the route, meters
    double nav_scale = 50.0;        // distance normalization for nav features
    int agent_count = 0;            // 0 = use the scene's target_agent_count
};

struct AgentOutcome {
    double reward = 0.0;
    bool done = false;
    EndReason reason = EndReason::none;
    Vec2 position;  // post-step pose, valid even after a done agent is removed
};

struct StepResult {
    std::map<int, AgentOutcome> outcomes;     // every agent that acted
    std::vector<int> spawned;                 // ids created after this step
    std::map<int, Observation> observations;  // every agent active after the step
};

// Driving world: vehicles on a lane network, continuous respawn up to a
// target population, range sensor, per-agent progress rewards. All i/o is
// keyed by agent id; ids are never reused within one reset.
class Simulator {
public:
    explicit Simulator(SceneSpec scene, SimConfig cfg = {});

    // Clears all state, reseeds the generator, places the initial
    // population. Returns the observations of the spawned agents.
    std::map<int, Observation> reset(std::uint64_t seed);

    // Advances one tick. `actions` must contain exactly the active ids
    // with finite commands, else std::invalid_argument.
    StepResult step(const std::map<int, KinematicAction>& actions);

    // Ends the episode at the horizon: every active agent is removed and
    // reported with EndReason::truncated (no reward, no dead body).
    std::map<int, AgentOutcome> truncate_active();

    int step_count() const { return step_; }
    int total_spawned() const { return next_id_; }
    int dead_body_count() const { return static_cast<int>(dead_.size()); }
    int active_count() const { return static_cast<int>(agents_.size()); }
    int target_population() const;
    // Changes the population target; existing vehicles are unaffected,
    // the new target applies from the next spawn opportunity on.
    void set_agent_count(int n) { cfg_.agent_count = n; }
    std::vector<int> active_ids() const;
    bool is_active(int id) const { return agents_.count(id) != 0; }

    const VehicleState& state(int id) const;
    double route_progress(int id) const;
    const Route& route(int id) const;
    int spawn_step(int id) const;

    Observation observe(int id) const;
    std::vector<double> lidar_scan(int id) const;
    // Ids of other active agents with center distance <= radius, ascending.
    std::vector<int> neighbors_within(int id, double radius) const;

    const SceneSpec& scene() const { return scene_; }
    const SimConfig& config() const { return cfg_; }

private:
    struct Agent {
        VehicleState state;
        Route route;
        double progress = 0.0;
        int spawn_step = 0;
    };
    struct DeadBody {
        Obb box;
        int steps_left = 0;
    };

    const Agent& agent(int id) const;
    void spawn_to_target(std::vector<int>* spawned);
    bool pose_is_free(const Obb& body) const;
    std::vector<int> crashed_agents() const;

    SceneSpec scene_;
    SimConfig cfg_;
    Rng rng_;
    int step_ = 0;
    int next_id_ = 0;
    std::map<int, Agent> agents_;
    std::vector<DeadBody> dead_;
};

}  // namespace copo::env
