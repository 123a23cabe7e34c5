#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "copo/util/geom.hpp"

namespace copo::env {

// Thrown when a scene file parses but violates a structural invariant.
struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LaneSpec {
    std::string id;
    Polyline centerline;
    double width = 0.0;
};

struct SpawnPoint {
    Vec2 position;
    double heading = 0.0;
    int lane = -1;       // resolved lane index
    double arc = 0.0;    // arc position of the spawn on its lane
};

struct DestinationSpec {
    Vec2 center;
    double radius = 0.0;
    int lane = -1;       // lane whose corridor contains the center
    double arc = 0.0;    // arc position of the anchor on that lane
};

// A drivable path from one spawn point to a destination region. The
// polyline starts at the spawn's arc position and ends at the destination
// anchor; width_at() reports the corridor width of the owning lane so
// lateral offsets can be normalized along the way.
struct Route {
    Polyline path;
    Vec2 dest_center;
    double dest_radius = 0.0;
    std::vector<double> width_breaks;  // arc positions where the width changes
    std::vector<double> widths;        // widths.size() == width_breaks.size() + 1

    double width_at(double s) const;
};

struct SceneSpec {
    std::string name;
    int target_agent_count = 0;
    std::vector<LaneSpec> lanes;
    std::vector<SpawnPoint> spawn_points;
    std::vector<DestinationSpec> destinations;
    std::vector<Obb> obstacles;

    // Derived by validate():
    std::vector<std::vector<int>> lane_successors;        // lane -> lanes whose start touches its end
    std::vector<std::vector<int>> reachable_destinations; // spawn -> destination indices
    // Road edges used by the range sensor. Interior joints between
    // connected lanes are filtered at scan time, not here.
    struct BoundarySegment {
        Vec2 a, b;
    };
    std::vector<BoundarySegment> boundaries;

    // True if p lies within shrink of the inside of some lane corridor
    // (shrink > 0 demands strict interiority, used for filtering
    // boundary segments that fall inside a connecting lane).
    bool in_drivable_area(const Vec2& p, double shrink = 0.0) const;
};

SceneSpec parse_scene(const std::string& text, const std::string& source_name);
SceneSpec load_scene(const std::string& path);

// Fills in the derived fields and throws SceneError on the first violated
// invariant: spawn points must sit inside the drivable area, every spawn
// must reach at least one destination, every destination must be
// reachable from at least one spawn, and corridors must be wide enough
// for a vehicle.
void validate_scene(SceneSpec& scene, double min_corridor_width);

Route build_route(const SceneSpec& scene, int spawn_index, int dest_index);

}  // namespace copo::env
