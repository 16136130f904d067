#include "waynav/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "waynav/world.hpp"

namespace waynav::kernels {

namespace {

double cast_one(const FloorPlan& plan, Vec2 origin, double bearing_deg, double max_range) {
    const Vec2 dir = unit_from_bearing(bearing_deg);
    double best = max_range;
    for (const Wall& w : plan.walls) {
        const Vec2 seg = w.b - w.a;
        const double denom = cross(dir, seg);
        if (std::abs(denom) < 1e-15) continue;  // parallel
        const Vec2 ao = w.a - origin;
        const double t = cross(ao, seg) / denom;
        const double s = cross(ao, dir) / denom;
        if (t >= 0.0 && s >= 0.0 && s <= 1.0 && t < best) best = t;
    }
    return best;
}

Vec2 grid_centre(const GridSpec& g, int col, int row) {
    return {g.origin_x + (col + 0.5) * g.resolution, g.origin_z + (row + 0.5) * g.resolution};
}

double nearest(Vec2 p, std::span<const Vec2> to) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : to) best = std::min(best, distance(p, q));
    return best;
}

}  // namespace

void cast_rays_serial(const FloorPlan& plan, Vec2 origin, std::span<const double> bearings, double max_range,
                      std::span<double> out) {
    for (std::size_t i = 0; i < bearings.size(); ++i) out[i] = cast_one(plan, origin, bearings[i], max_range);
}

void cast_rays_parallel(const FloorPlan& plan, Vec2 origin, std::span<const double> bearings, double max_range,
                        std::span<double> out) {
    const auto n = static_cast<long>(bearings.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] = cast_one(plan, origin, bearings[i], max_range);
}

void clearance_grid_serial(const FloorPlan& plan, const GridSpec& grid, std::span<double> out) {
    for (int row = 0; row < grid.rows; ++row)
        for (int col = 0; col < grid.cols; ++col)
            out[static_cast<std::size_t>(row) * grid.cols + col] = plan.clearance(grid_centre(grid, col, row));
}

void clearance_grid_parallel(const FloorPlan& plan, const GridSpec& grid, std::span<double> out) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < grid.rows; ++row)
        for (int col = 0; col < grid.cols; ++col)
            out[static_cast<std::size_t>(row) * grid.cols + col] = plan.clearance(grid_centre(grid, col, row));
}

void nearest_distances_serial(std::span<const Vec2> from, std::span<const Vec2> to, std::span<double> out) {
    for (std::size_t i = 0; i < from.size(); ++i) out[i] = nearest(from[i], to);
}

void nearest_distances_parallel(std::span<const Vec2> from, std::span<const Vec2> to, std::span<double> out) {
    const auto n = static_cast<long>(from.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[i] = nearest(from[i], to);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace waynav::kernels
