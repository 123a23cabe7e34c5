#pragma once

#include "copo/env/simulator.hpp"
#include "copo/env/vehicle.hpp"

namespace copo::eval {

// Intelligent-driver-model car following plus pure-pursuit lane keeping.
struct IdmConfig {
    double desired_speed = 8.0;  // v0, m/s
    double time_headway = 1.5;   // T, s
    double max_accel = 2.0;      // a, m/s^2
    double comfort_brake = 4.0;  // b, m/s^2
    double min_gap = 2.0;        // s0, m
    double exponent = 4.0;       // delta
    double lookahead = 60.0;     // leader search range along the route, m
};

// accel = a [1 - (v/v0)^delta - (s*/s)^2], s* = s0 + vT + v dv / (2 sqrt(ab)).
// `leader` false evaluates the free-road law; gap is bumper-to-bumper,
// dv = v_ego - v_leader.
double idm_accel(const IdmConfig& cfg, double v, bool leader, double gap, double dv);

// Full controller for one live agent: longitudinal command from idm_accel
// against the nearest same-route vehicle ahead, steering from pure
// pursuit on the route. Commands come out clamped to [-1, 1].
env::KinematicAction idm_action(const env::Simulator& sim, int id, const IdmConfig& cfg);

}  // namespace copo::eval
