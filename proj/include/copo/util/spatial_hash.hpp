#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "copo/util/geom.hpp"

namespace copo {

// Uniform grid over 2D points, used as the broad phase for collision pairs
// and for neighborhood-radius queries.
class SpatialHash {
public:
    explicit SpatialHash(double cell_size = 10.0) : cell_(cell_size) {}

    void clear() { cells_.clear(); }

    void insert(int id, const Vec2& p) {
        cells_[key(cell_x(p), cell_y(p))].push_back({id, p});
    }

    // Ids of all inserted points with |q - p| <= radius, ascending by id.
    // The query point's own id is not special-cased; callers exclude self.
    void query_radius(const Vec2& q, double radius, std::vector<int>& out) const {
        out.clear();
        const int x0 = cell_coord(q.x - radius), x1 = cell_coord(q.x + radius);
        const int y0 = cell_coord(q.y - radius), y1 = cell_coord(q.y + radius);
        const double r2 = radius * radius;
        for (int cx = x0; cx <= x1; ++cx) {
            for (int cy = y0; cy <= y1; ++cy) {
                const auto it = cells_.find(key(cx, cy));
                if (it == cells_.end()) continue;
                for (const auto& [id, p] : it->second) {
                    if ((p - q).norm2() <= r2) out.push_back(id);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }

private:
    int cell_coord(double v) const {
        return static_cast<int>(std::floor(v / cell_));
    }
    int cell_x(const Vec2& p) const { return cell_coord(p.x); }
    int cell_y(const Vec2& p) const { return cell_coord(p.y); }

    static int64_t key(int cx, int cy) {
        return (static_cast<int64_t>(cx) << 32) ^ (static_cast<int64_t>(cy) & 0xffffffffll);
    }

    double cell_;
    std::unordered_map<int64_t, std::vector<std::pair<int, Vec2>>> cells_;
};

}  // namespace copo
