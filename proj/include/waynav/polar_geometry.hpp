#pragma once

// Depth panorama -> 120-direction shortest-distance profile -> 120x12 occupancy mask.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "waynav/geometry.hpp"

namespace waynav {

inline constexpr int kAngleBins = 120;
inline constexpr int kDistBins = 12;
inline constexpr int kCells = kAngleBins * kDistBins;
inline constexpr int kViews = 12;
inline constexpr int kReducedColumns = 30;
inline constexpr double kBinDegrees = 3.0;
inline constexpr double kDistStep = 0.25;
inline constexpr double kMaxWaypointDist = 3.0;
// One distance bin beyond the farthest waypoint bin.
inline constexpr double kMaxDepthRange = 3.25;

// Distance value d_j of column j, in meters.
inline constexpr double dist_bin_value(int j) { return kDistStep * (j + 1); }

enum class Projection {
    cylindrical,  // column azimuth linear in column index
    pinhole,      // column azimuth = atan of image-plane offset
};

struct DepthCamera {
    double hfov_deg = 90.0;
    int width = 240;
    int height = 240;
    double camera_height = 0.7;
    double vfov_deg = 90.0;
    Projection projection = Projection::cylindrical;

    // Throws ConfigError when an invariant is broken.
    void validate() const;
};

struct DepthImage {
    int width = 0;
    int height = 0;
    double heading_deg = 0.0;
    std::vector<double> pixels;  // row-major, pixels[row * width + col]

    DepthImage() = default;
    DepthImage(int w, int h, double heading, double fill = 0.0)
        : width(w), height(h), heading_deg(heading), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int col, int row) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct DepthPanorama {
    std::vector<DepthImage> views;

    void validate() const;
};

// 30 x h grid; values[row * 30 + n]. source_cols records which original column
// supplied each minimum.
struct ReducedDepth {
    int height = 0;
    std::vector<double> values;
    std::vector<int> source_cols;

    double at(int n, int row) const { return values[static_cast<std::size_t>(row) * kReducedColumns + n]; }
};

struct ShortestDistanceProfile {
    std::array<double, kAngleBins> distances{};
};

struct OccupancyMask {
    std::array<std::uint8_t, kCells> cells{};

    std::uint8_t at(int k, int j) const { return cells[static_cast<std::size_t>(k) * kDistBins + j]; }
    std::uint8_t& at(int k, int j) { return cells[static_cast<std::size_t>(k) * kDistBins + j]; }
};

// Azimuth of a column relative to the optical axis, degrees, clockwise positive.
double column_azimuth_deg(const DepthCamera& camera, double col);
// Elevation of a row, degrees, up positive.
double row_elevation_deg(const DepthCamera& camera, double row);

// Unit world-frame direction of pixel (col, row). x right, y up, z forward at heading 0.
Vec3 ray_direction(const DepthCamera& camera, double heading_deg, int col, int row);

// Collapses each group of width/30 columns to its per-row minimum.
ReducedDepth reduce_depth_view(const DepthImage& view);

// Depth times unit ray of the nearest pixel in reduced column n, agent at the
// origin. Ties between rows go to the row closest to the horizon.
Vec3 column_min_point(const ReducedDepth& reduced, const DepthCamera& camera, double heading_deg, int n);

inline double horizontal_distance(Vec3 c) { return std::sqrt(c.x * c.x + c.z * c.z); }

// Uses views 0, 3, 6, 9; bin k covers [3k, 3k+3) degrees clockwise from view 0's heading.
ShortestDistanceProfile shortest_distance_profile(const DepthPanorama& pano, const DepthCamera& camera);

// M[k][j] = 1 iff d_j <= D_k.
OccupancyMask occupancy_mask(const ShortestDistanceProfile& profile);

}  // namespace waynav
