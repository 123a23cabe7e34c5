#include "copo/eval/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "copo/util/pnm.hpp"

namespace copo::eval {
namespace {

constexpr std::uint8_t kPalette[8][3] = {
    {225, 60, 60},  {55, 125, 225},  {60, 190, 90},  {235, 175, 40},
    {165, 90, 215}, {55, 200, 200},  {235, 115, 195}, {145, 145, 55},
};

}  // namespace

DensityGrid trajectory_density(const std::vector<TrajPoint>& pts, double cell) {
    if (cell <= 0.0) throw std::invalid_argument("cell size must be positive");
    DensityGrid g;
    g.cell = cell;
    if (pts.empty()) return g;

    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    int max_group = 0;
    for (const TrajPoint& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
        max_group = std::max(max_group, p.spawn_group);
    }
    g.min_x = min_x - cell;
    g.min_y = min_y - cell;
    g.w = static_cast<int>(std::floor((max_x - g.min_x) / cell)) + 2;
    g.h = static_cast<int>(std::floor((max_y - g.min_y) / cell)) + 2;
    g.groups = max_group + 1;
    g.counts.assign(static_cast<size_t>(g.w) * g.h * g.groups, 0);

    for (const TrajPoint& p : pts) {
        const int ix = static_cast<int>(std::floor((p.x - g.min_x) / cell));
        const int iy = static_cast<int>(std::floor((p.y - g.min_y) / cell));
        ++g.counts[(static_cast<size_t>(iy) * g.w + ix) * g.groups + p.spawn_group];
        ++g.total;
        if (p.crash) g.crashes.emplace_back(p.x, p.y);
    }
    return g;
}

void write_density_pgm(const DensityGrid& g, const std::string& path) {
    const int w = std::max(g.w, 1), h = std::max(g.h, 1);
    std::vector<std::uint8_t> gray(static_cast<size_t>(w) * h, 255);
    std::uint64_t peak = 0;
    for (int iy = 0; iy < g.h; ++iy)
        for (int ix = 0; ix < g.w; ++ix) peak = std::max(peak, g.cell_total(ix, iy));
    if (peak > 0) {
        for (int iy = 0; iy < g.h; ++iy) {
            for (int ix = 0; ix < g.w; ++ix) {
                const double v = std::sqrt(static_cast<double>(g.cell_total(ix, iy)) / peak);
                // image row 0 is the top of the scene
                gray[static_cast<size_t>(g.h - 1 - iy) * w + ix] =
                    static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - v)));
            }
        }
    }
    write_pgm(path, w, h, gray);
}

void write_density_ppm(const DensityGrid& g, const std::string& path) {
    const int w = std::max(g.w, 1), h = std::max(g.h, 1);
    std::vector<std::uint8_t> rgb(static_cast<size_t>(w) * h * 3, 250);
    std::uint64_t peak = 0;
    for (int iy = 0; iy < g.h; ++iy)
        for (int ix = 0; ix < g.w; ++ix) peak = std::max(peak, g.cell_total(ix, iy));

    for (int iy = 0; iy < g.h && peak > 0; ++iy) {
        for (int ix = 0; ix < g.w; ++ix) {
            const std::uint64_t tot = g.cell_total(ix, iy);
            if (tot == 0) continue;
            double r = 0, gr = 0, b = 0;
            for (int gi = 0; gi < g.groups; ++gi) {
                const double share = static_cast<double>(g.count_at(ix, iy, gi)) / tot;
                const std::uint8_t* c = kPalette[gi % 8];
                r += share * c[0];
                gr += share * c[1];
                b += share * c[2];
            }
            const double t = std::sqrt(static_cast<double>(tot) / peak);
            const size_t px = (static_cast<size_t>(g.h - 1 - iy) * w + ix) * 3;
            rgb[px + 0] = static_cast<std::uint8_t>(std::lround(250.0 + t * (r - 250.0)));
            rgb[px + 1] = static_cast<std::uint8_t>(std::lround(250.0 + t * (gr - 250.0)));
            rgb[px + 2] = static_cast<std::uint8_t>(std::lround(250.0 + t * (b - 250.0)));
        }
    }

    // crash markers: 3x3 dark red blocks
    for (const auto& [cx, cy] : g.crashes) {
        const int ix = static_cast<int>(std::floor((cx - g.min_x) / g.cell));
        const int iy = static_cast<int>(std::floor((cy - g.min_y) / g.cell));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int x = ix + dx, y = iy + dy;
                if (x < 0 || x >= g.w || y < 0 || y >= g.h) continue;
                const size_t px = (static_cast<size_t>(g.h - 1 - y) * w + x) * 3;
                rgb[px + 0] = 130;
                rgb[px + 1] = 0;
                rgb[px + 2] = 0;
            }
        }
    }
    write_ppm(path, w, h, rgb);
}

void write_density_text(const DensityGrid& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "# cell " << g.cell << " origin " << g.min_x << ' ' << g.min_y << " size " << g.w << ' '
      << g.h << " groups " << g.groups << " total " << g.total << "\n";
    f << "# nonzero cells: ix iy group count\n";
    for (int iy = 0; iy < g.h; ++iy)
        for (int ix = 0; ix < g.w; ++ix)
            for (int gi = 0; gi < g.groups; ++gi)
                if (const std::uint64_t c = g.count_at(ix, iy, gi); c > 0)
                    f << ix << ' ' << iy << ' ' << gi << ' ' << c << "\n";
    f << "# crashes: x y\n";
    for (const auto& [x, y] : g.crashes) f << "crash " << x << ' ' << y << "\n";
}

}  // namespace copo::eval
