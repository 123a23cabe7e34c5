#include "copo/env/scene.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>

#include "copo/util/ini.hpp"

namespace copo::env {
namespace {

double parse_double(const IniEntry& e, const std::string& source) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        while (pos < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[pos]))) ++pos;
        if (pos != e.value.size()) throw std::invalid_argument("trailing junk");
        if (!std::isfinite(v)) throw std::invalid_argument("not finite");
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, e.line, "expected a number for '" + e.key + "', got '" + e.value + "'");
    }
}

Vec2 parse_vec2(const IniEntry& e, const std::string& source) {
    std::istringstream in(e.value);
    double x, y;
    char comma;
    if (!(in >> x >> comma >> y) || comma != ',') {
        throw ParseError(source, e.line, "expected 'x, y' for '" + e.key + "', got '" + e.value + "'");
    }
    std::string rest;
    if (in >> rest) {
        throw ParseError(source, e.line, "trailing junk after 'x, y' in '" + e.key + "'");
    }
    return {x, y};
}

Polyline parse_polyline(const IniEntry& e, const std::string& source) {
    std::vector<Vec2> pts;
    std::stringstream whole(e.value);
    std::string part;
    while (std::getline(whole, part, ';')) {
        std::istringstream in(part);
        double x, y;
        char comma;
        if (!(in >> x >> comma >> y) || comma != ',') {
            throw ParseError(source, e.line, "bad point '" + part + "' in '" + e.key + "'");
        }
        pts.push_back({x, y});
    }
    if (pts.size() < 2) {
        throw ParseError(source, e.line, "'" + e.key + "' needs at least two points");
    }
    return Polyline(std::move(pts));
}

const IniEntry& require(const IniSection& sec, const std::string& key, const std::string& source) {
    const IniEntry* e = sec.find(key);
    if (!e) throw ParseError(source, sec.line, "[" + sec.name + "] section is missing '" + key + "'");
    return *e;
}

}  // namespace

double Route::width_at(double s) const {
    size_t i = 0;
    while (i < width_breaks.size() && s >= width_breaks[i]) ++i;
    return widths[i];
}

bool SceneSpec::in_drivable_area(const Vec2& p, double shrink) const {
    for (const LaneSpec& lane : lanes) {
        if (lane.centerline.distance_to(p) <= lane.width * 0.5 - shrink) return true;
    }
    return false;
}

namespace {

SceneSpec scene_from_ini(const IniFile& ini, const std::string& source_name) {
    SceneSpec scene;

    for (const IniEntry& e : ini.sections[0].entries) {
        if (e.key == "name") {
            scene.name = e.value;
        } else if (e.key == "target_agent_count") {
            scene.target_agent_count = static_cast<int>(parse_double(e, source_name));
        } else {
            throw ParseError(source_name, e.line, "unknown scene key '" + e.key + "'");
        }
    }

    for (size_t si = 1; si < ini.sections.size(); ++si) {
        const IniSection& sec = ini.sections[si];
        if (sec.name == "lane") {
            LaneSpec lane;
            lane.id = require(sec, "id", source_name).value;
            lane.width = parse_double(require(sec, "width", source_name), source_name);
            lane.centerline = parse_polyline(require(sec, "centerline", source_name), source_name);
            if (lane.width <= 0.0) {
                throw ParseError(source_name, sec.line, "lane '" + lane.id + "' has non-positive width");
            }
            if (lane.centerline.length() <= 0.0) {
                throw ParseError(source_name, sec.line, "lane '" + lane.id + "' has zero-length centerline");
            }
            for (const LaneSpec& other : scene.lanes) {
                if (other.id == lane.id) {
                    throw ParseError(source_name, sec.line, "duplicate lane id '" + lane.id + "'");
                }
            }
            scene.lanes.push_back(std::move(lane));
        } else if (sec.name == "spawn") {
            SpawnPoint sp;
            sp.position = parse_vec2(require(sec, "position", source_name), source_name);
            sp.heading = parse_double(require(sec, "heading", source_name), source_name);
            const std::string lane_id = require(sec, "lane", source_name).value;
            for (size_t li = 0; li < scene.lanes.size(); ++li) {
                if (scene.lanes[li].id == lane_id) sp.lane = static_cast<int>(li);
            }
            if (sp.lane < 0) {
                throw ParseError(source_name, sec.line, "spawn references unknown lane '" + lane_id + "'");
            }
            scene.spawn_points.push_back(sp);
        } else if (sec.name == "destination") {
            DestinationSpec d;
            d.center = parse_vec2(require(sec, "center", source_name), source_name);
            d.radius = parse_double(require(sec, "radius", source_name), source_name);
            if (d.radius <= 0.0) {
                throw ParseError(source_name, sec.line, "destination radius must be positive");
            }
            scene.destinations.push_back(d);
        } else if (sec.name == "obstacle") {
            Obb box;
            box.center = parse_vec2(require(sec, "center", source_name), source_name);
            const Vec2 size = parse_vec2(require(sec, "size", source_name), source_name);
            if (size.x <= 0.0 || size.y <= 0.0) {
                throw ParseError(source_name, sec.line, "obstacle size must be positive");
            }
            box.half_len = size.x * 0.5;
            box.half_wid = size.y * 0.5;
            box.heading = parse_double(require(sec, "heading", source_name), source_name);
            scene.obstacles.push_back(box);
        } else {
            throw ParseError(source_name, sec.line, "unknown section [" + sec.name + "]");
        }
    }
    return scene;
}

}  // namespace

SceneSpec parse_scene(const std::string& text, const std::string& source_name) {
    return scene_from_ini(IniFile::parse(text, source_name), source_name);
}

SceneSpec load_scene(const std::string& path) {
    return scene_from_ini(IniFile::parse_file(path), path);
}

namespace {

// Per-lane boundary: the two offset polylines plus end caps. Joints on
// the outside of a bend leave a wedge; a chord across it keeps the
// outline closed. Inner-side chords land strictly inside the corridor
// and are filtered by the scan-time interiority test.
void build_lane_boundary(const LaneSpec& lane, std::vector<SceneSpec::BoundarySegment>& out) {
    const std::vector<Vec2>& pts = lane.centerline.points();
    const double h = lane.width * 0.5;
    std::vector<Vec2> ln, rn;  // per-segment offset endpoints, 2 per segment
    for (size_t i = 1; i < pts.size(); ++i) {
        const Vec2 d = pts[i] - pts[i - 1];
        const double len = d.norm();
        if (len < 1e-9) continue;
        const Vec2 n{-d.y / len, d.x / len};
        ln.push_back(pts[i - 1] + n * h);
        ln.push_back(pts[i] + n * h);
        rn.push_back(pts[i - 1] - n * h);
        rn.push_back(pts[i] - n * h);
    }
    if (ln.empty()) return;
    auto push = [&out](const Vec2& a, const Vec2& b) {
        if ((b - a).norm() > 1e-9) out.push_back({a, b});
    };
    for (size_t i = 0; i + 1 < ln.size(); i += 2) {
        push(ln[i], ln[i + 1]);
        push(rn[i], rn[i + 1]);
        if (i + 2 < ln.size()) {  // joint chords
            push(ln[i + 1], ln[i + 2]);
            push(rn[i + 1], rn[i + 2]);
        }
    }
    push(ln.front(), rn.front());  // end caps
    push(ln.back(), rn.back());
}

}  // namespace

void validate_scene(SceneSpec& scene, double min_corridor_width) {
    if (scene.lanes.empty()) throw SceneError("scene has no lanes");
    if (scene.spawn_points.empty()) throw SceneError("scene has no spawn points");
    if (scene.destinations.empty()) throw SceneError("scene has no destinations");
    if (scene.target_agent_count < 1) {
        throw SceneError("target_agent_count must be at least 1");
    }

    for (const LaneSpec& lane : scene.lanes) {
        if (lane.width < min_corridor_width) {
            std::ostringstream msg;
            msg << "lane '" << lane.id << "' is " << lane.width
                << "m wide, narrower than the " << min_corridor_width << "m a vehicle needs";
            throw SceneError(msg.str());
        }
    }

    // Lane graph: u -> v when v's centerline starts where u's ends.
    const size_t n = scene.lanes.size();
    scene.lane_successors.assign(n, {});
    for (size_t u = 0; u < n; ++u) {
        const Vec2 end = scene.lanes[u].centerline.points().back();
        for (size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            const Vec2 start = scene.lanes[v].centerline.points().front();
            if ((end - start).norm() < 0.5) scene.lane_successors[u].push_back(static_cast<int>(v));
        }
    }

    for (size_t i = 0; i < scene.spawn_points.size(); ++i) {
        SpawnPoint& sp = scene.spawn_points[i];
        if (!scene.in_drivable_area(sp.position)) {
            std::ostringstream msg;
            msg << "spawn point " << i << " at (" << sp.position.x << ", " << sp.position.y
                << ") lies outside the drivable area";
            throw SceneError(msg.str());
        }
        sp.arc = scene.lanes[sp.lane].centerline.project(sp.position);
    }

    // Anchor each destination to the nearest lane whose corridor holds it.
    for (size_t i = 0; i < scene.destinations.size(); ++i) {
        DestinationSpec& d = scene.destinations[i];
        double best = kInf;
        for (size_t li = 0; li < n; ++li) {
            const double dist = scene.lanes[li].centerline.distance_to(d.center);
            if (dist <= scene.lanes[li].width * 0.5 && dist < best) {
                best = dist;
                d.lane = static_cast<int>(li);
            }
        }
        if (d.lane < 0) {
            std::ostringstream msg;
            msg << "destination " << i << " at (" << d.center.x << ", " << d.center.y
                << ") is not on any lane";
            throw SceneError(msg.str());
        }
        d.arc = scene.lanes[d.lane].centerline.project(d.center);
    }

    // Reachability: BFS over successors, seeded one edge out so a
    // destination behind the spawn on its own lane only counts when a
    // cycle leads back around.
    scene.reachable_destinations.assign(scene.spawn_points.size(), {});
    std::vector<bool> dest_reached(scene.destinations.size(), false);
    for (size_t si = 0; si < scene.spawn_points.size(); ++si) {
        const SpawnPoint& sp = scene.spawn_points[si];
        std::vector<bool> seen(n, false);
        std::deque<int> frontier;
        for (int v : scene.lane_successors[sp.lane]) {
            if (!seen[v]) {
                seen[v] = true;
                frontier.push_back(v);
            }
        }
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop_front();
            for (int v : scene.lane_successors[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    frontier.push_back(v);
                }
            }
        }
        for (size_t di = 0; di < scene.destinations.size(); ++di) {
            const DestinationSpec& d = scene.destinations[di];
            const bool same_lane_ahead = d.lane == sp.lane && d.arc >= sp.arc;
            if (same_lane_ahead || seen[d.lane]) {
                scene.reachable_destinations[si].push_back(static_cast<int>(di));
                dest_reached[di] = true;
            }
        }
        if (scene.reachable_destinations[si].empty()) {
            std::ostringstream msg;
            msg << "spawn point " << si << " cannot reach any destination";
            throw SceneError(msg.str());
        }
    }
    for (size_t di = 0; di < scene.destinations.size(); ++di) {
        if (!dest_reached[di]) {
            std::ostringstream msg;
            msg << "destination " << di << " is unreachable from every spawn point";
            throw SceneError(msg.str());
        }
    }

    scene.boundaries.clear();
    for (const LaneSpec& lane : scene.lanes) build_lane_boundary(lane, scene.boundaries);
}

Route build_route(const SceneSpec& scene, int spawn_index, int dest_index) {
    const SpawnPoint& sp = scene.spawn_points[spawn_index];
    const DestinationSpec& dest = scene.destinations[dest_index];

    // Dijkstra over lanes, edge weight = successor lane length. The
    // start cost covers the remainder of the spawn lane.
    const size_t n = scene.lanes.size();
    std::vector<double> cost(n, kInf);
    std::vector<int> parent(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

    std::vector<int> lane_seq;
    if (dest.lane == sp.lane && dest.arc >= sp.arc) {
        lane_seq = {sp.lane};
    } else {
        const double start_cost = scene.lanes[sp.lane].centerline.length() - sp.arc;
        for (int v : scene.lane_successors[sp.lane]) {
            if (start_cost < cost[v]) {
                cost[v] = start_cost;
                parent[v] = -1;
                heap.push({start_cost, v});
            }
        }
        while (!heap.empty()) {
            const auto [c, u] = heap.top();
            heap.pop();
            if (c > cost[u]) continue;
            if (u == dest.lane) break;
            const double through = c + scene.lanes[u].centerline.length();
            for (int v : scene.lane_successors[u]) {
                if (through < cost[v]) {
                    cost[v] = through;
                    parent[v] = u;
                    heap.push({through, v});
                }
            }
        }
        if (cost[dest.lane] == kInf) {
            throw SceneError("no route from spawn " + std::to_string(spawn_index) +
                             " to destination " + std::to_string(dest_index));
        }
        for (int u = dest.lane; u != -1; u = parent[u]) lane_seq.push_back(u);
        lane_seq.push_back(sp.lane);
        std::reverse(lane_seq.begin(), lane_seq.end());
    }

    Route route;
    route.dest_center = dest.center;
    route.dest_radius = dest.radius;
    for (size_t k = 0; k < lane_seq.size(); ++k) {
        const LaneSpec& lane = scene.lanes[lane_seq[k]];
        const double s0 = k == 0 ? sp.arc : 0.0;
        const double s1 = k + 1 == lane_seq.size() ? dest.arc : lane.centerline.length();
        const double before = route.path.length();
        route.path.append(lane.centerline.slice(s0, s1));
        if (k == 0) {
            route.widths.push_back(lane.width);
        } else if (lane.width != route.widths.back()) {
            route.width_breaks.push_back(before);
            route.widths.push_back(lane.width);
        }
    }
    return route;
}

}  // namespace copo::env
