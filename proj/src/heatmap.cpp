#include "waynav/heatmap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "waynav/errors.hpp"

namespace waynav {

int angle_bin_distance(int a, int b) {
    const int d = std::abs(a - b) % kAngleBins;
    return std::min(d, kAngleBins - d);
}

std::vector<Waypoint> nms(const PolarHeatmap& heatmap, int k_max, int radius_bins) {
    std::vector<Waypoint> picked;
    std::array<bool, kAngleBins> suppressed{};
    while (static_cast<int>(picked.size()) < k_max) {
        int best = -1;
        double best_score = 0.0;
        for (int idx = 0; idx < kCells; ++idx) {
            if (suppressed[static_cast<std::size_t>(idx / kDistBins)]) continue;
            const double s = heatmap.scores[static_cast<std::size_t>(idx)];
            // strict comparison keeps the lowest linear index on ties
            if (s > best_score) {
                best_score = s;
                best = idx;
            }
        }
        if (best < 0) break;
        const int k = best / kDistBins;
        picked.push_back({k, best % kDistBins, best_score});
        for (int dk = -radius_bins; dk <= radius_bins; ++dk)
            suppressed[static_cast<std::size_t>(((k + dk) % kAngleBins + kAngleBins) % kAngleBins)] = true;
    }
    return picked;
}

PolarPoint polar_to_metric(const Waypoint& w) {
    if (w.angle_bin < 0 || w.angle_bin >= kAngleBins || w.dist_bin < 0 || w.dist_bin >= kDistBins)
        throw IndexError("waypoint cell out of range");
    return {kBinDegrees * w.angle_bin + kBinDegrees / 2.0, dist_bin_value(w.dist_bin)};
}

Waypoint metric_to_cell(double theta_deg, double dist_m) {
    if (!(dist_m > 0.0) || dist_m > kMaxWaypointDist + 1e-9)
        throw RangeError("waypoint distance must lie in (0, 3.00] m");
    const double theta = wrap_degrees(theta_deg);
    const int k = std::min(static_cast<int>(std::floor(theta / kBinDegrees)), kAngleBins - 1);
    const int j = std::clamp(static_cast<int>(std::ceil(dist_m / kDistStep - 1e-9)) - 1, 0, kDistBins - 1);
    return {k, j, 0.0};
}

Vec2 polar_to_offset(const PolarPoint& p) { return unit_from_bearing(p.theta_deg) * p.dist_m; }

PolarHeatmap target_heatmap(const std::vector<PolarPoint>& waypoints) {
    PolarHeatmap out;
    const int reach_k = static_cast<int>(3.0 * kTargetSigmaAngle);
    const int reach_j = static_cast<int>(3.0 * kTargetSigmaDist);
    for (const auto& p : waypoints) {
        const Waypoint c = metric_to_cell(p.theta_deg, p.dist_m);
        for (int dk = -reach_k; dk <= reach_k; ++dk) {
            const int k = ((c.angle_bin + dk) % kAngleBins + kAngleBins) % kAngleBins;
            for (int dj = -reach_j; dj <= reach_j; ++dj) {
                const int j = c.dist_bin + dj;
                if (j < 0 || j >= kDistBins) continue;
                const double v = std::exp(-0.5 * (dk * dk / (kTargetSigmaAngle * kTargetSigmaAngle) +
                                                  dj * dj / (kTargetSigmaDist * kTargetSigmaDist)));
                out.at(k, j) = std::max(out.at(k, j), v);
            }
        }
    }
    return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError("truncated heatmap file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_heatmap(std::ostream& out, const PolarHeatmap& heatmap) {
    out.write("PHM1", 4);
    put_u32(out, kAngleBins);
    put_u32(out, kDistBins);
    put_u32(out, 0);
    for (double s : heatmap.scores) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
}

PolarHeatmap read_heatmap(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "PHM1", 4) != 0) throw LoadError("not a PHM1 heatmap");
    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    get_u32(in);
    if (rows != kAngleBins || cols != kDistBins) throw LoadError("heatmap shape must be 120x12");
    PolarHeatmap h;
    for (auto& s : h.scores) s = std::bit_cast<float>(get_u32(in));
    return h;
}

void save_heatmap(const std::string& path, const PolarHeatmap& heatmap) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_heatmap(out, heatmap);
}

PolarHeatmap load_heatmap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    return read_heatmap(in);
}

}  // namespace waynav
