#pragma once

#include <array>

#include "waynav/heatmap.hpp"
#include "waynav/polar_geometry.hpp"

namespace waynav {

inline constexpr double kDefaultLambdaOcc = 0.5;
inline constexpr double kBceEpsilon = 1e-7;

struct LossBreakdown {
    double l_vis = 0.0;
    double l_occ = 0.0;
    double l_total = 0.0;
    double lambda_occ = kDefaultLambdaOcc;
};

using HeatmapGradient = std::array<double, kCells>;

// Mean squared error over the 1440 cells.
double l_vis(const PolarHeatmap& p, const PolarHeatmap& p_star);

// Mean binary cross-entropy of P (clamped to [eps, 1 - eps]) against the mask.
double l_occ(const PolarHeatmap& p, const OccupancyMask& m);

LossBreakdown l_total(const PolarHeatmap& p, const PolarHeatmap& p_star, const OccupancyMask& m,
                      double lambda_occ = kDefaultLambdaOcc);

// d l_total / d P. Cells at or beyond the BCE clamp get no BCE contribution.
HeatmapGradient grad_l_total(const PolarHeatmap& p, const PolarHeatmap& p_star, const OccupancyMask& m,
                             double lambda_occ = kDefaultLambdaOcc);

}  // namespace waynav
