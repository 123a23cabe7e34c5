#pragma once

#include <algorithm>
#include <cmath>

#include "copo/util/geom.hpp"

namespace copo::env {

// Raw policy output; both commands live in [-1, 1] and are clamped here.
struct KinematicAction {
    double steer_cmd = 0.0;
    double accel_cmd = 0.0;
};

enum class EndReason { none, success, crash, out_of_road, truncated };

inline const char* end_reason_name(EndReason r) {
    switch (r) {
        case EndReason::none: return "none";
        case EndReason::success: return "success";
        case EndReason::crash: return "crash";
        case EndReason::out_of_road: return "out_of_road";
        case EndReason::truncated: return "truncated";
    }
    return "?";
}

struct VehicleParams {
    double length = 4.5;       // wheelbase == body length
    double width = 1.8;
    double max_steer = 0.6;    // rad
    double max_accel = 3.0;    // m/s^2
    double max_brake = 5.0;    // m/s^2, applied when accel_cmd < 0
    double max_speed = 15.0;   // m/s
};

struct VehicleState {
    Vec2 position;
    double heading = 0.0;
    double speed = 0.0;
    double steering = 0.0;  // current wheel angle, rad

    Obb body(const VehicleParams& p) const {
        return Obb{position, heading, p.length * 0.5, p.width * 0.5};
    }
};

// Kinematic bicycle step, explicit Euler with the pre-step state on the
// right-hand side. Commands outside [-1, 1] are clamped, negative accel
// commands scale the brake limit.
inline VehicleState bicycle_step(const VehicleState& s, const KinematicAction& act,
                                 const VehicleParams& p, double dt) {
    const double steer_cmd = std::clamp(act.steer_cmd, -1.0, 1.0);
    const double accel_cmd = std::clamp(act.accel_cmd, -1.0, 1.0);
    const double delta = steer_cmd * p.max_steer;
    const double accel = accel_cmd >= 0.0 ? accel_cmd * p.max_accel : accel_cmd * p.max_brake;

    VehicleState out = s;
    out.position.x = s.position.x + dt * s.speed * std::cos(s.heading);
    out.position.y = s.position.y + dt * s.speed * std::sin(s.heading);
    out.heading = wrap_angle(s.heading + dt * s.speed / p.length * std::tan(delta));
    out.speed = std::clamp(s.speed + dt * accel, 0.0, p.max_speed);
    out.steering = delta;
    return out;
}

}  // namespace copo::env
