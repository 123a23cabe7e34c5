#include "copo/util/geom.hpp"

#include <algorithm>

namespace copo {

bool obb_overlap(const Obb& a, const Obb& b) {
    // cheap reject on bounding circles
    const double r = a.bounding_radius() + b.bounding_radius();
    if ((a.center - b.center).norm2() > r * r) return false;

    Vec2 ca[4], cb[4];
    a.corners(ca);
    b.corners(cb);

    const Vec2 axes[4] = {
        {std::cos(a.heading), std::sin(a.heading)},
        {-std::sin(a.heading), std::cos(a.heading)},
        {std::cos(b.heading), std::sin(b.heading)},
        {-std::sin(b.heading), std::cos(b.heading)},
    };

    for (const Vec2& axis : axes) {
        double amin = kInf, amax = -kInf, bmin = kInf, bmax = -kInf;
        for (int i = 0; i < 4; ++i) {
            const double pa = ca[i].dot(axis);
            const double pb = cb[i].dot(axis);
            amin = std::min(amin, pa);
            amax = std::max(amax, pa);
            bmin = std::min(bmin, pb);
            bmax = std::max(bmax, pb);
        }
        if (amax < bmin || bmax < amin) return false;
    }
    return true;
}

double ray_segment(const Vec2& o, const Vec2& d, const Vec2& a, const Vec2& b) {
    const Vec2 e = b - a;
    const double denom = d.cross(e);
    if (std::abs(denom) < 1e-15) return kInf;  // parallel
    const Vec2 ao = a - o;
    const double t = ao.cross(e) / denom;
    const double u = ao.cross(d) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return kInf;
    return t;
}

double ray_obb(const Vec2& o, const Vec2& d, const Obb& box) {
    // slab test in the box frame
    const double c = std::cos(box.heading), s = std::sin(box.heading);
    const Vec2 rel = o - box.center;
    const Vec2 lo{rel.x * c + rel.y * s, -rel.x * s + rel.y * c};
    const Vec2 ld{d.x * c + d.y * s, -d.x * s + d.y * c};

    double tmin = 0.0, tmax = kInf;
    const double half[2] = {box.half_len, box.half_wid};
    const double op[2] = {lo.x, lo.y};
    const double dp[2] = {ld.x, ld.y};
    for (int i = 0; i < 2; ++i) {
        if (std::abs(dp[i]) < 1e-15) {
            if (op[i] < -half[i] || op[i] > half[i]) return kInf;
            continue;
        }
        double t1 = (-half[i] - op[i]) / dp[i];
        double t2 = (half[i] - op[i]) / dp[i];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax) return kInf;
    }
    return tmin;
}

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 e = b - a;
    const double len2 = e.norm2();
    if (len2 < 1e-30) return (p - a).norm();
    double t = (p - a).dot(e) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + e * t)).norm();
}

Polyline::Polyline(std::vector<Vec2> pts) : pts_(std::move(pts)) { rebuild(); }

void Polyline::rebuild() {
    cum_.assign(pts_.size(), 0.0);
    for (size_t i = 1; i < pts_.size(); ++i) {
        cum_[i] = cum_[i - 1] + (pts_[i] - pts_[i - 1]).norm();
    }
}

Vec2 Polyline::point_at(double s) const {
    if (pts_.empty()) return {};
    if (s <= 0.0) return pts_.front();
    if (s >= length()) return pts_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const size_t i = static_cast<size_t>(it - cum_.begin());
    const double seg = cum_[i] - cum_[i - 1];
    const double t = seg > 0.0 ? (s - cum_[i - 1]) / seg : 0.0;
    return pts_[i - 1] + (pts_[i] - pts_[i - 1]) * t;
}

double Polyline::heading_at(double s) const {
    if (pts_.size() < 2) return 0.0;
    size_t i = 1;
    if (s > 0.0) {
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), std::min(s, length()));
        i = std::min(static_cast<size_t>(it - cum_.begin()), pts_.size() - 1);
        // skip zero-length segments
        while (i + 1 < pts_.size() && cum_[i] - cum_[i - 1] <= 0.0) ++i;
    }
    const Vec2 d = pts_[i] - pts_[i - 1];
    return std::atan2(d.y, d.x);
}

double Polyline::project(const Vec2& p) const {
    return project_near(p, 0.0, kInf);
}

double Polyline::project_near(const Vec2& p, double hint, double window) const {
    double best_d2 = kInf;
    double best_s = std::clamp(hint, 0.0, length());
    const double lo = hint - window, hi = hint + window;
    for (size_t i = 1; i < pts_.size(); ++i) {
        if (cum_[i] < lo || cum_[i - 1] > hi) continue;
        const Vec2 a = pts_[i - 1], b = pts_[i];
        const Vec2 e = b - a;
        const double len2 = e.norm2();
        double t = len2 > 0.0 ? std::clamp((p - a).dot(e) / len2, 0.0, 1.0) : 0.0;
        double s = cum_[i - 1] + t * std::sqrt(len2);
        s = std::clamp(s, lo, hi);
        const Vec2 q = point_at(s);
        const double d2 = (p - q).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_s = s;
        }
    }
    return best_s;
}

double Polyline::distance_to(const Vec2& p) const {
    double best = kInf;
    for (size_t i = 1; i < pts_.size(); ++i) {
        best = std::min(best, point_segment_dist(p, pts_[i - 1], pts_[i]));
    }
    return best;
}

Polyline Polyline::slice(double s0, double s1) const {
    s0 = std::clamp(s0, 0.0, length());
    s1 = std::clamp(s1, s0, length());
    std::vector<Vec2> out;
    out.push_back(point_at(s0));
    for (size_t i = 1; i + 1 < pts_.size(); ++i) {
        if (cum_[i] > s0 && cum_[i] < s1) out.push_back(pts_[i]);
    }
    const Vec2 last = point_at(s1);
    if ((last - out.back()).norm() > 1e-9 || out.size() == 1) out.push_back(last);
    return Polyline(std::move(out));
}

void Polyline::append(const Polyline& tail) {
    if (tail.pts_.empty()) return;
    size_t start = 0;
    if (!pts_.empty() && (pts_.back() - tail.pts_.front()).norm() < 1e-9) start = 1;
    for (size_t i = start; i < tail.pts_.size(); ++i) pts_.push_back(tail.pts_[i]);
    rebuild();
}

}  // namespace copo
