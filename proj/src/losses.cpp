#include "waynav/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "waynav/errors.hpp"

namespace waynav {

namespace {

constexpr double kCellCount = static_cast<double>(kCells);

void check_finite(const PolarHeatmap& p, const char* name) {
    for (double v : p.scores)
        if (!std::isfinite(v)) throw ValidationError(std::string(name) + " holds a non-finite score");
}

}  // namespace

double l_vis(const PolarHeatmap& p, const PolarHeatmap& p_star) {
    check_finite(p, "P");
    check_finite(p_star, "P*");
    double sum = 0.0;
    for (int i = 0; i < kCells; ++i) {
        const double d = p.scores[i] - p_star.scores[i];
        sum += d * d;
    }
    return sum / kCellCount;
}

double l_occ(const PolarHeatmap& p, const OccupancyMask& m) {
    check_finite(p, "P");
    double sum = 0.0;
    for (int i = 0; i < kCells; ++i) {
        const double q = std::clamp(p.scores[i], kBceEpsilon, 1.0 - kBceEpsilon);
        sum -= m.cells[i] ? std::log(q) : std::log1p(-q);
    }
    return sum / kCellCount;
}

LossBreakdown l_total(const PolarHeatmap& p, const PolarHeatmap& p_star, const OccupancyMask& m, double lambda_occ) {
    if (!(lambda_occ >= 0.0)) throw ValidationError("lambda_occ must be non-negative");
    LossBreakdown out;
    out.lambda_occ = lambda_occ;
    out.l_vis = l_vis(p, p_star);
    out.l_occ = l_occ(p, m);
    out.l_total = out.l_vis + lambda_occ * out.l_occ;
    return out;
}

HeatmapGradient grad_l_total(const PolarHeatmap& p, const PolarHeatmap& p_star, const OccupancyMask& m,
                             double lambda_occ) {
    HeatmapGradient g{};
    for (int i = 0; i < kCells; ++i) {
        const double v = p.scores[i];
        double d = 2.0 * (v - p_star.scores[i]) / kCellCount;
        if (v > kBceEpsilon && v < 1.0 - kBceEpsilon) d += lambda_occ * (v - m.cells[i]) / (kCellCount * v * (1.0 - v));
        g[i] = d;
    }
    return g;
}

}  // namespace waynav
