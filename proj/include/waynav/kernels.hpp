#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// variant producing identical output; the library calls the parallel variant.

#include <span>

#include "waynav/geometry.hpp"

namespace waynav {
struct FloorPlan;
}

namespace waynav::kernels {

struct GridSpec {
    double origin_x = 0.0;
    double origin_z = 0.0;
    double resolution = 0.05;
    int cols = 0;
    int rows = 0;
};

// out[i] = distance along bearings[i] to the nearest wall, clamped at max_range.
void cast_rays_serial(const FloorPlan& plan, Vec2 origin, std::span<const double> bearings, double max_range,
                      std::span<double> out);
void cast_rays_parallel(const FloorPlan& plan, Vec2 origin, std::span<const double> bearings, double max_range,
                        std::span<double> out);

// out[row * cols + col] = wall clearance of the cell centre.
void clearance_grid_serial(const FloorPlan& plan, const GridSpec& grid, std::span<double> out);
void clearance_grid_parallel(const FloorPlan& plan, const GridSpec& grid, std::span<double> out);

// out[i] = min_j |from[i] - to[j]|.
void nearest_distances_serial(std::span<const Vec2> from, std::span<const Vec2> to, std::span<double> out);
void nearest_distances_parallel(std::span<const Vec2> from, std::span<const Vec2> to, std::span<double> out);

// Number of threads the parallel variants use.
int max_threads();

}  // namespace waynav::kernels
