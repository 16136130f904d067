#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "waynav/polar_geometry.hpp"

namespace waynav {

// 120 angle bins x 12 distance bins, row-major with k outer and j inner.
struct PolarHeatmap {
    std::array<double, kCells> scores{};

    double at(int k, int j) const { return scores[static_cast<std::size_t>(k) * kDistBins + j]; }
    double& at(int k, int j) { return scores[static_cast<std::size_t>(k) * kDistBins + j]; }
};

struct Waypoint {
    int angle_bin = 0;
    int dist_bin = 0;
    double score = 0.0;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct PolarPoint {
    double theta_deg = 0.0;
    double dist_m = 0.0;
};

inline constexpr int kMaxWaypoints = 5;
inline constexpr int kNmsRadiusBins = 3;

// Cyclic distance between two angle bins.
int angle_bin_distance(int a, int b);

// Greedy peak extraction; suppresses +/- radius_bins angle bins across every
// distance bin. Stops after k_max picks or when no positive cell remains.
std::vector<Waypoint> nms(const PolarHeatmap& heatmap, int k_max = kMaxWaypoints, int radius_bins = kNmsRadiusBins);

// Bin centre in angle, bin value d_j in distance.
PolarPoint polar_to_metric(const Waypoint& w);

// Inverse of polar_to_metric: k = floor(theta / 3), j = ceil(dist / 0.25) - 1.
Waypoint metric_to_cell(double theta_deg, double dist_m);

// Egocentric polar point -> metric offset (x right, z forward).
Vec2 polar_to_offset(const PolarPoint& p);

inline constexpr double kTargetSigmaAngle = 2.0;
inline constexpr double kTargetSigmaDist = 1.0;

// Truncated Gaussian blobs (3 sigma) centred on each waypoint's cell, combined by max.
PolarHeatmap target_heatmap(const std::vector<PolarPoint>& waypoints);

// PHM1 flat format: "PHM1", u32 rows, u32 cols, u32 reserved, then rows*cols f32,
// all little-endian.
void write_heatmap(std::ostream& out, const PolarHeatmap& heatmap);
PolarHeatmap read_heatmap(std::istream& in);
void save_heatmap(const std::string& path, const PolarHeatmap& heatmap);
PolarHeatmap load_heatmap(const std::string& path);

}  // namespace waynav
