#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "copo/eval/evaluate.hpp"

namespace copo::eval {

// Per-spawn-group occupancy histogram over square cells, plus the crash
// locations. An empty point set yields a 0x0 grid.
struct DensityGrid {
    double cell = 0.5;
    double min_x = 0.0, min_y = 0.0;  // world coordinate of cell (0, 0)
    int w = 0, h = 0, groups = 0;
    std::vector<std::uint64_t> counts;  // (iy * w + ix) * groups + g
    std::uint64_t total = 0;
    std::vector<std::pair<double, double>> crashes;

    std::uint64_t count_at(int ix, int iy, int g) const {
        return counts[(static_cast<size_t>(iy) * w + ix) * groups + g];
    }
    std::uint64_t cell_total(int ix, int iy) const {
        std::uint64_t s = 0;
        for (int g = 0; g < groups; ++g) s += count_at(ix, iy, g);
        return s;
    }
};

DensityGrid trajectory_density(const std::vector<TrajPoint>& pts, double cell = 0.5);

// Grayscale occupancy (dark = busy), spawn-group color render with crash
// markers, and a sparse text dump of the raw grid.
void write_density_pgm(const DensityGrid& g, const std::string& path);
void write_density_ppm(const DensityGrid& g, const std::string& path);
void write_density_text(const DensityGrid& g, const std::string& path);

}  // namespace copo::eval
