#include "copo/eval/idm.hpp"

#include <algorithm>
#include <cmath>

namespace copo::eval {

double idm_accel(const IdmConfig& cfg, double v, bool leader, double gap, double dv) {
    const double free_term = std::pow(v / cfg.desired_speed, cfg.exponent);
    if (!leader) return cfg.max_accel * (1.0 - free_term);
    const double s_star = cfg.min_gap + v * cfg.time_headway +
                          v * dv / (2.0 * std::sqrt(cfg.max_accel * cfg.comfort_brake));
    const double ratio = s_star / gap;
    return cfg.max_accel * (1.0 - free_term - ratio * ratio);
}

env::KinematicAction idm_action(const env::Simulator& sim, int id, const IdmConfig& cfg) {
    const env::VehicleState& ego = sim.state(id);
    const env::Route& route = sim.route(id);
    const env::VehicleParams& veh = sim.config().vehicle;
    const double s_ego = sim.route_progress(id);

    // nearest vehicle ahead on (the corridor of) this agent's route
    bool have_leader = false;
    double gap = 0.0, leader_speed = 0.0;
    double best_ds = cfg.lookahead + 1.0;
    for (int other : sim.active_ids()) {
        if (other == id) continue;
        const Vec2 p = sim.state(other).position;
        const double s = route.path.project(p);
        const double ds = s - s_ego;
        if (ds <= 0.0 || ds > cfg.lookahead || ds >= best_ds) continue;
        const double lateral = (route.path.point_at(s) - p).norm();
        if (lateral > 0.5 * route.width_at(s)) continue;
        best_ds = ds;
        have_leader = true;
        gap = std::max(ds - veh.length, 0.1);
        leader_speed = sim.state(other).speed;
    }

    const double accel =
        idm_accel(cfg, ego.speed, have_leader, gap, ego.speed - leader_speed);

    env::KinematicAction act;
    act.accel_cmd = accel >= 0.0 ? std::min(accel / veh.max_accel, 1.0)
                                 : std::max(accel / veh.max_brake, -1.0);

    // pure pursuit toward a speed-scaled lookahead point on the route
    const double ld = std::clamp(1.5 * ego.speed, 4.0, 15.0);
    const Vec2 target = route.path.point_at(s_ego + ld);
    const Vec2 to_target = target - ego.position;
    const double alpha = wrap_angle(std::atan2(to_target.y, to_target.x) - ego.heading);
    const double steer = std::atan2(2.0 * veh.length * std::sin(alpha), ld);
    act.steer_cmd = std::clamp(steer / veh.max_steer, -1.0, 1.0);
    return act;
}

}  // namespace copo::eval
