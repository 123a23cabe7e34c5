#include "copo/env/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "copo/util/spatial_hash.hpp"

namespace copo::env {

namespace {
constexpr double kProgressWindow = 8.0;   // projection locality per tick, meters
constexpr double kInteriorShrink = 1e-6;  // margin for the boundary-hit filter
}  // namespace

Simulator::Simulator(SceneSpec scene, SimConfig cfg)
    : scene_(std::move(scene)), cfg_(cfg), rng_(0) {
    if (scene_.boundaries.empty() && !scene_.lanes.empty()) {
        validate_scene(scene_, cfg_.vehicle.width);
    }
}

int Simulator::target_population() const {
    return cfg_.agent_count > 0 ? cfg_.agent_count : scene_.target_agent_count;
}

const Simulator::Agent& Simulator::agent(int id) const {
    const auto it = agents_.find(id);
    if (it == agents_.end()) {
        throw std::out_of_range("no active agent with id " + std::to_string(id));
    }
    return it->second;
}

const VehicleState& Simulator::state(int id) const { return agent(id).state; }
double Simulator::route_progress(int id) const { return agent(id).progress; }
const Route& Simulator::route(int id) const { return agent(id).route; }
int Simulator::spawn_step(int id) const { return agent(id).spawn_step; }

std::vector<int> Simulator::active_ids() const {
    std::vector<int> ids;
    ids.reserve(agents_.size());
    for (const auto& [id, a] : agents_) ids.push_back(id);
    return ids;
}

bool Simulator::pose_is_free(const Obb& body) const {
    for (const auto& [id, a] : agents_) {
        if (obb_overlap(body, a.state.body(cfg_.vehicle))) return false;
    }
    for (const DeadBody& d : dead_) {
        if (obb_overlap(body, d.box)) return false;
    }
    for (const Obb& o : scene_.obstacles) {
        if (obb_overlap(body, o)) return false;
    }
    return true;
}

void Simulator::spawn_to_target(std::vector<int>* spawned) {
    const int target = target_population();
    while (static_cast<int>(agents_.size()) < target) {
        std::vector<int> free;
        for (size_t i = 0; i < scene_.spawn_points.size(); ++i) {
            const SpawnPoint& sp = scene_.spawn_points[i];
            const VehicleState pose{sp.position, sp.heading, 0.0, 0.0};
            if (pose_is_free(pose.body(cfg_.vehicle))) free.push_back(static_cast<int>(i));
        }
        if (free.empty()) break;  // everything blocked; retry next tick

        const int spawn_idx = free[rng_.uniform_int(free.size())];
        const auto& dests = scene_.reachable_destinations[spawn_idx];
        const int dest_idx = dests[rng_.uniform_int(dests.size())];
        const SpawnPoint& sp = scene_.spawn_points[spawn_idx];

        Agent a;
        a.state = VehicleState{sp.position, sp.heading, 0.0, 0.0};
        a.route = build_route(scene_, spawn_idx, dest_idx);
        a.progress = 0.0;
        a.spawn_step = step_;
        const int id = next_id_++;
        agents_.emplace(id, std::move(a));
        if (spawned) spawned->push_back(id);
    }
}

std::map<int, Observation> Simulator::reset(std::uint64_t seed) {
    rng_.reseed(seed);
    step_ = 0;
    next_id_ = 0;
    agents_.clear();
    dead_.clear();
    spawn_to_target(nullptr);

    std::map<int, Observation> obs;
    for (const auto& [id, a] : agents_) obs.emplace(id, observe(id));
    return obs;
}

std::vector<int> Simulator::crashed_agents() const {
    SpatialHash hash(10.0);
    for (const auto& [id, a] : agents_) hash.insert(id, a.state.position);

    const double reach = 2.0 * Obb{{}, 0.0, cfg_.vehicle.length * 0.5, cfg_.vehicle.width * 0.5}
                                   .bounding_radius();
    std::set<int> crashed;
    std::vector<int> nearby;
    for (const auto& [id, a] : agents_) {
        const Obb body = a.state.body(cfg_.vehicle);
        hash.query_radius(a.state.position, reach, nearby);
        for (int other : nearby) {
            if (other <= id) continue;  // each pair once
            if (obb_overlap(body, agents_.at(other).state.body(cfg_.vehicle))) {
                crashed.insert(id);
                crashed.insert(other);
            }
        }
        if (crashed.count(id)) continue;
        for (const DeadBody& d : dead_) {
            if (obb_overlap(body, d.box)) {
                crashed.insert(id);
                break;
            }
        }
        if (crashed.count(id)) continue;
        for (const Obb& o : scene_.obstacles) {
            if (obb_overlap(body, o)) {
                crashed.insert(id);
                break;
            }
        }
    }
    return {crashed.begin(), crashed.end()};
}

StepResult Simulator::step(const std::map<int, KinematicAction>& actions) {
    // The action map must cover exactly the active population.
    for (const auto& [id, act] : actions) {
        if (!agents_.count(id)) {
            throw std::invalid_argument("action for inactive agent " + std::to_string(id));
        }
        if (!std::isfinite(act.steer_cmd) || !std::isfinite(act.accel_cmd)) {
            throw std::invalid_argument("non-finite action for agent " + std::to_string(id));
        }
    }
    for (const auto& [id, a] : agents_) {
        if (!actions.count(id)) {
            throw std::invalid_argument("missing action for agent " + std::to_string(id));
        }
    }

    // Expired wrecks leave the road before anything moves.
    std::erase_if(dead_, [](const DeadBody& d) { return d.steps_left == 0; });
    for (DeadBody& d : dead_) --d.steps_left;

    std::map<int, double> progress_delta;
    for (auto& [id, a] : agents_) {
        a.state = bicycle_step(a.state, actions.at(id), cfg_.vehicle, cfg_.dt);
        const double s = a.route.path.project_near(a.state.position, a.progress, kProgressWindow);
        progress_delta[id] = s - a.progress;
        a.progress = s;
    }

    const std::vector<int> crashed = crashed_agents();

    StepResult result;
    std::vector<int> done_ids;
    for (const auto& [id, a] : agents_) {
        AgentOutcome out;
        const bool hit = std::binary_search(crashed.begin(), crashed.end(), id);
        if ((a.state.position - a.route.dest_center).norm() <= a.route.dest_radius) {
            out.reason = EndReason::success;
        } else if (hit) {
            out.reason = EndReason::crash;
        } else if (!scene_.in_drivable_area(a.state.position)) {
            out.reason = EndReason::out_of_road;
        }
        out.done = out.reason != EndReason::none;
        out.position = a.state.position;
        out.reward = cfg_.progress_gain * progress_delta.at(id);
        if (out.reason == EndReason::success) {
            out.reward += cfg_.success_bonus;
        } else if (out.done) {
            out.reward -= cfg_.failure_penalty;
        }
        result.outcomes.emplace(id, out);
        if (out.done) done_ids.push_back(id);
    }

    for (int id : done_ids) {
        dead_.push_back({agents_.at(id).state.body(cfg_.vehicle), cfg_.dead_body_steps});
        agents_.erase(id);
    }

    ++step_;
    spawn_to_target(&result.spawned);

    for (const auto& [id, a] : agents_) result.observations.emplace(id, observe(id));
    return result;
}

std::map<int, AgentOutcome> Simulator::truncate_active() {
    std::map<int, AgentOutcome> out;
    for (const auto& [id, a] : agents_) {
        out.emplace(id, AgentOutcome{0.0, true, EndReason::truncated, a.state.position});
    }
    agents_.clear();
    return out;
}

std::vector<double> Simulator::lidar_scan(int id) const {
    const Agent& self = agent(id);
    const Vec2 origin = self.state.position;

    std::vector<Obb> bodies;
    bodies.reserve(agents_.size() + dead_.size() + scene_.obstacles.size());
    for (const auto& [oid, a] : agents_) {
        if (oid != id) bodies.push_back(a.state.body(cfg_.vehicle));
    }
    for (const DeadBody& d : dead_) bodies.push_back(d.box);
    for (const Obb& o : scene_.obstacles) bodies.push_back(o);

    std::vector<double> dists(Observation::kLidarRays, cfg_.lidar_range);
    std::vector<double> wall_hits;
    for (int k = 0; k < Observation::kLidarRays; ++k) {
        const double ang = self.state.heading + 2.0 * kPi * k / Observation::kLidarRays;
        const Vec2 dir{std::cos(ang), std::sin(ang)};

        double best = cfg_.lidar_range;
        for (const Obb& b : bodies) best = std::min(best, ray_obb(origin, dir, b));

        // Road edges: the nearest hit that is not interior to some other
        // corridor (joints between connected lanes are open road).
        wall_hits.clear();
        for (const auto& seg : scene_.boundaries) {
            const double t = ray_segment(origin, dir, seg.a, seg.b);
            if (t < best) wall_hits.push_back(t);
        }
        std::sort(wall_hits.begin(), wall_hits.end());
        for (double t : wall_hits) {
            if (!scene_.in_drivable_area(origin + dir * t, kInteriorShrink)) {
                best = t;
                break;
            }
        }
        dists[k] = best;
    }
    return dists;
}

std::vector<int> Simulator::neighbors_within(int id, double radius) const {
    const Agent& self = agent(id);
    SpatialHash hash(10.0);
    for (const auto& [oid, a] : agents_) hash.insert(oid, a.state.position);
    std::vector<int> out;
    hash.query_radius(self.state.position, radius, out);
    std::erase(out, id);
    return out;
}

Observation Simulator::observe(int id) const {
    const Agent& a = agent(id);
    const VehicleParams& vp = cfg_.vehicle;

    Observation obs;
    obs.data.reserve(Observation::kDim);

    const double s = a.progress;
    const Vec2 on_path = a.route.path.point_at(s);
    const double path_heading = a.route.path.heading_at(s);
    const Vec2 tangent{std::cos(path_heading), std::sin(path_heading)};
    const double lat = tangent.cross(a.state.position - on_path);  // >0 left of path
    const double w = a.route.width_at(s);

    obs.data.push_back(a.state.speed / vp.max_speed);
    obs.data.push_back(a.state.steering / vp.max_steer);
    obs.data.push_back(wrap_angle(a.state.heading - path_heading) / kPi);
    obs.data.push_back(std::clamp((0.5 * w - lat) / w, 0.0, 1.0));
    obs.data.push_back(std::clamp((0.5 * w + lat) / w, 0.0, 1.0));

    const auto bearing = [&](const Vec2& target) {
        const Vec2 rel = target - a.state.position;
        if (rel.norm2() < 1e-12) return 0.0;
        return wrap_angle(std::atan2(rel.y, rel.x) - a.state.heading) / kPi;
    };
    const Vec2 checkpoint =
        a.route.path.point_at(std::min(s + cfg_.checkpoint_dist, a.route.path.length()));
    obs.data.push_back(std::clamp((checkpoint - a.state.position).norm() / cfg_.nav_scale, 0.0, 1.0));
    obs.data.push_back(bearing(checkpoint));
    obs.data.push_back(std::clamp((a.route.dest_center - a.state.position).norm() / cfg_.nav_scale, 0.0, 1.0));
    obs.data.push_back(bearing(a.route.dest_center));

    for (double d : lidar_scan(id)) obs.data.push_back(d / cfg_.lidar_range);
    return obs;
}

}  // namespace copo::env
