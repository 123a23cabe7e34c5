#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace copo {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
};

inline double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

// Oriented rectangle given by center, heading and half extents.
struct Obb {
    Vec2 center;
    double heading = 0.0;
    double half_len = 0.0;
    double half_wid = 0.0;

    void corners(Vec2 out[4]) const {
        const double c = std::cos(heading), s = std::sin(heading);
        const Vec2 u{c * half_len, s * half_len};
        const Vec2 v{-s * half_wid, c * half_wid};
        out[0] = center + u + v;
        out[1] = center + u - v;
        out[2] = center - u - v;
        out[3] = center - u + v;
    }

    double bounding_radius() const { return std::hypot(half_len, half_wid); }
};

// Separating-axis test for two oriented rectangles. Touching counts as overlap.
bool obb_overlap(const Obb& a, const Obb& b);

// Parametric distance t >= 0 where the unit ray o + t*d first hits segment
// [a, b], or +inf if it misses.
double ray_segment(const Vec2& o, const Vec2& d, const Vec2& a, const Vec2& b);

// Parametric distance where the ray first enters the rectangle, +inf on miss.
// A ray starting inside returns 0.
double ray_obb(const Vec2& o, const Vec2& d, const Obb& box);

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b);

// Open polyline with precomputed cumulative arc length.
class Polyline {
public:
    Polyline() = default;
    explicit Polyline(std::vector<Vec2> pts);

    const std::vector<Vec2>& points() const { return pts_; }
    double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
    bool empty() const { return pts_.size() < 2; }

    Vec2 point_at(double s) const;
    double heading_at(double s) const;

    // Arc position of the globally nearest point to p.
    double project(const Vec2& p) const;

    // Arc position of the nearest point to p restricted to
    // [hint - window, hint + window]. Keeps progress tracking monotone on
    // self-approaching routes.
    double project_near(const Vec2& p, double hint, double window) const;

    double distance_to(const Vec2& p) const;

    void append(const Polyline& tail);

    // Sub-polyline between arc positions s0 <= s1 (clamped to [0, length]).
    Polyline slice(double s0, double s1) const;

private:
    std::vector<Vec2> pts_;
    std::vector<double> cum_;
    void rebuild();
};

}  // namespace copo
