#pragma once

// Dependency-free renders: top-down SVG trajectories and binary PPM heatmaps.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/trace.hpp"
#include "waynav/world.hpp"

namespace waynav {

inline constexpr double kSvgPixelsPerMetre = 50.0;
inline constexpr int kHeatmapImageSize = 241;

// Walls, objects, goal, one polyline per trajectory and a marker per collided step.
std::string render_trajectory_svg(const FloorPlan& plan, const std::vector<EpisodeTrace>& traces);

using Rgb = std::array<std::uint8_t, 3>;
// Black at 0 through red and yellow to white at 1; matches the background at 0.
Rgb heat_colour(double v);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major RGB
};

// Top-down polar disc with forward at the top and clockwise angles; waypoints are
// drawn as cyan squares.
RgbImage render_heatmap_image(const PolarHeatmap& heatmap, const std::vector<Waypoint>& waypoints = {},
                              int size = kHeatmapImageSize);
std::string encode_ppm(const RgbImage& image);

}  // namespace waynav
