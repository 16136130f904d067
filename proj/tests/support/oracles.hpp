#pragma once

// Brute-force reference implementations used only by tests. They share no code
// with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/world.hpp"

namespace oracle {

using waynav::Vec2;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Ray/segment hit distance along a unit direction; +inf when missed.
inline double ray_hit(Vec2 o, Vec2 dir, Vec2 a, Vec2 b) {
    const double ex = b.x - a.x;
    const double ez = b.z - a.z;
    const double det = dir.x * (-ez) - dir.z * (-ex);
    if (std::abs(det) < 1e-15) return std::numeric_limits<double>::infinity();
    const double rx = a.x - o.x;
    const double rz = a.z - o.z;
    const double t = (rx * (-ez) - rz * (-ex)) / det;
    const double s = (dir.x * rz - dir.z * rx) / det;
    if (t < 0.0 || s < 0.0 || s > 1.0) return std::numeric_limits<double>::infinity();
    return t;
}

inline double cast(const waynav::FloorPlan& plan, Vec2 o, double bearing_deg, double max_range) {
    const Vec2 dir{std::sin(deg2rad(bearing_deg)), std::cos(deg2rad(bearing_deg))};
    double best = max_range;
    for (const auto& w : plan.walls) best = std::min(best, ray_hit(o, dir, w.a, w.b));
    return best;
}

// Shortest wall distance per 3-degree bin from `rays_per_bin` evenly spread rays.
inline std::vector<double> dense_profile(const waynav::FloorPlan& plan, const waynav::AgentPose& pose,
                                         int rays_per_bin = 32, double max_range = 3.25) {
    std::vector<double> d(120, max_range);
    for (int k = 0; k < 120; ++k)
        for (int r = 0; r < rays_per_bin; ++r) {
            const double bearing = pose.heading_deg + 3.0 * k + 3.0 * (r + 0.5) / rays_per_bin;
            d[static_cast<std::size_t>(k)] = std::min(d[static_cast<std::size_t>(k)], cast(plan, pose.position(), bearing, max_range));
        }
    return d;
}

// Cell (k, j) open iff 0.25 (j + 1) <= D_k.
inline std::vector<int> mask_from(const std::vector<double>& profile) {
    std::vector<int> m(1440, 0);
    for (int k = 0; k < 120; ++k)
        for (int j = 0; j < 12; ++j) m[static_cast<std::size_t>(k * 12 + j)] = 0.25 * (j + 1) <= profile[static_cast<std::size_t>(k)] ? 1 : 0;
    return m;
}

// Greedy peak picking recomputed from scratch each round.
inline std::vector<waynav::Waypoint> nms(const waynav::PolarHeatmap& h, int k_max = 5, int radius = 3) {
    std::vector<waynav::Waypoint> picked;
    auto suppressed = [&](int k) {
        for (const auto& p : picked) {
            const int d = std::abs(k - p.angle_bin);
            if (std::min(d, 120 - d) <= radius) return true;
        }
        return false;
    };
    while (static_cast<int>(picked.size()) < k_max) {
        int best = -1;
        for (int idx = 0; idx < 1440; ++idx) {
            if (suppressed(idx / 12)) continue;
            if (!(h.scores[static_cast<std::size_t>(idx)] > 0.0)) continue;
            if (best < 0 || h.scores[static_cast<std::size_t>(idx)] > h.scores[static_cast<std::size_t>(best)]) best = idx;
        }
        if (best < 0) break;
        picked.push_back({best / 12, best % 12, h.scores[static_cast<std::size_t>(best)]});
    }
    return picked;
}

inline double nearest(Vec2 p, const std::vector<Vec2>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : set) best = std::min(best, std::hypot(p.x - q.x, p.z - q.z));
    return best;
}

inline double chamfer(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double sa = 0.0;
    double sb = 0.0;
    for (const auto& p : a) sa += nearest(p, b);
    for (const auto& p : b) sb += nearest(p, a);
    return 0.5 * (sa / a.size() + sb / b.size());
}

inline double hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double h = 0.0;
    for (const auto& p : a) h = std::max(h, nearest(p, b));
    for (const auto& p : b) h = std::max(h, nearest(p, a));
    return h;
}

inline double wall_clearance(const waynav::FloorPlan& plan, Vec2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : plan.walls) {
        const double ex = w.b.x - w.a.x;
        const double ez = w.b.z - w.a.z;
        const double len2 = ex * ex + ez * ez;
        double t = len2 > 0 ? ((p.x - w.a.x) * ex + (p.z - w.a.z) * ez) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        best = std::min(best, std::hypot(p.x - (w.a.x + t * ex), p.z - (w.a.z + t * ez)));
    }
    return best;
}

// Plain Dijkstra on a uniform grid with 16-neighbour moves, nearest free cell
// at each end plus straight connectors.
inline double grid_geodesic(const waynav::FloorPlan& plan, Vec2 a, Vec2 b, double res = 0.025, double radius = 0.18) {
    const auto& bd = plan.bounds;
    const int cols = static_cast<int>(std::ceil((bd.max_x - bd.min_x) / res));
    const int rows = static_cast<int>(std::ceil((bd.max_z - bd.min_z) / res));
    auto centre = [&](int c, int r) { return Vec2{bd.min_x + (c + 0.5) * res, bd.min_z + (r + 0.5) * res}; };
    std::vector<char> free(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) free[static_cast<std::size_t>(r) * cols + c] = wall_clearance(plan, centre(c, r)) >= radius;
    auto ok = [&](int c, int r) { return c >= 0 && r >= 0 && c < cols && r < rows && free[static_cast<std::size_t>(r) * cols + c]; };
    auto snap = [&](Vec2 p) {
        int best = -1;
        double bd2 = std::numeric_limits<double>::infinity();
        const int c0 = static_cast<int>((p.x - bd.min_x) / res);
        const int r0 = static_cast<int>((p.z - bd.min_z) / res);
        for (int r = r0 - 6; r <= r0 + 6; ++r)
            for (int c = c0 - 6; c <= c0 + 6; ++c)
                if (ok(c, r)) {
                    const Vec2 q = centre(c, r);
                    const double d = std::hypot(q.x - p.x, q.z - p.z);
                    if (d < bd2) {
                        bd2 = d;
                        best = r * cols + c;
                    }
                }
        return std::make_pair(best, bd2);
    };
    const auto [sa, da] = snap(a);
    const auto [sb, db] = snap(b);
    if (sa < 0 || sb < 0) return std::numeric_limits<double>::infinity();
    std::vector<double> dist(free.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    dist[static_cast<std::size_t>(sa)] = 0.0;
    q.push({0.0, sa});
    const int moves[16][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1},
                              {1, 2}, {1, -2}, {-1, 2}, {-1, -2}, {2, 1}, {2, -1}, {-2, 1}, {-2, -1}};
    while (!q.empty()) {
        const auto [d, cell] = q.top();
        q.pop();
        if (d > dist[static_cast<std::size_t>(cell)]) continue;
        if (cell == sb) break;
        const int c = cell % cols;
        const int r = cell / cols;
        for (const auto& m : moves) {
            if (!ok(c + m[0], r + m[1])) continue;
            if (std::abs(m[0]) + std::abs(m[1]) == 3) {
                // both cells the knight move crosses
                const int hc = std::abs(m[0]) == 2 ? m[0] / 2 : 0;
                const int hr = std::abs(m[1]) == 2 ? m[1] / 2 : 0;
                if (!ok(c + hc, r + hr) || !ok(c + m[0] - hc, r + m[1] - hr)) continue;
            }
            const int next = (r + m[1]) * cols + c + m[0];
            const double nd = d + res * std::hypot(m[0], m[1]);
            if (nd < dist[static_cast<std::size_t>(next)]) {
                dist[static_cast<std::size_t>(next)] = nd;
                q.push({nd, next});
            }
        }
    }
    const double path = dist[static_cast<std::size_t>(sb)];
    if (!std::isfinite(path)) return path;
    if (sa == sb) return std::hypot(a.x - b.x, a.z - b.z);
    return path + da + db;
}

// Central finite difference of f at x along coordinate i.
template <typename F, typename Vec>
double central_difference(F&& f, Vec x, std::size_t i, double h) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    return (up - down) / (2.0 * h);
}

inline double relative_error(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
