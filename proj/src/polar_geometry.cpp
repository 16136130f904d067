#include "waynav/polar_geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "waynav/errors.hpp"

namespace waynav {

void DepthCamera::validate() const {
    if (std::abs(hfov_deg - 90.0) > 1e-12) throw ConfigError("depth camera hfov must be 90 degrees");
    if (width < kReducedColumns || width % kReducedColumns != 0)
        throw ConfigError("depth camera width must be a positive multiple of 30, got " + std::to_string(width));
    if (height < 1) throw ConfigError("depth camera height must be >= 1");
    if (!(vfov_deg > 0.0 && vfov_deg < 180.0)) throw ConfigError("depth camera vfov must be in (0, 180)");
}

void DepthPanorama::validate() const {
    if (views.size() != static_cast<std::size_t>(kViews))
        throw ValidationError("panorama must hold 12 views, got " + std::to_string(views.size()));
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& v = views[i];
        if (v.width <= 0 || v.height <= 0 || v.pixels.size() != static_cast<std::size_t>(v.width) * v.height)
            throw ValidationError("panorama view " + std::to_string(i) + " has inconsistent dimensions");
        if (v.width != views[0].width || v.height != views[0].height)
            throw ValidationError("panorama views differ in size");
        if (i > 0 && std::abs(v.heading_deg - views[i - 1].heading_deg - 30.0) > 1e-9)
            throw ValidationError("panorama headings must increase by 30 degrees at view " + std::to_string(i));
        for (double d : v.pixels) {
            if (!std::isfinite(d) || d < 0.0)
                throw ValidationError("panorama view " + std::to_string(i) + " has a negative or non-finite depth");
        }
    }
}

double column_azimuth_deg(const DepthCamera& camera, double col) {
    const double half = camera.width / 2.0;
    if (camera.projection == Projection::cylindrical) return (col - half) * camera.hfov_deg / camera.width;
    const double focal = half / std::tan(deg2rad(camera.hfov_deg / 2.0));
    return rad2deg(std::atan((col - half) / focal));
}

double row_elevation_deg(const DepthCamera& camera, double row) {
    const double half = camera.height / 2.0;
    const double focal = half / std::tan(deg2rad(camera.vfov_deg / 2.0));
    return rad2deg(std::atan((half - row) / focal));
}

Vec3 ray_direction(const DepthCamera& camera, double heading_deg, int col, int row) {
    if (col < 0 || col >= camera.width || row < 0 || row >= camera.height)
        throw IndexError("pixel (" + std::to_string(col) + ", " + std::to_string(row) + ") outside the image");

    double cx = 0.0;
    double cy = 0.0;
    double cz = 0.0;
    if (camera.projection == Projection::cylindrical) {
        const double az = deg2rad(column_azimuth_deg(camera, col));
        const double el = deg2rad(row_elevation_deg(camera, row));
        cx = std::cos(el) * std::sin(az);
        cy = std::sin(el);
        cz = std::cos(el) * std::cos(az);
    } else {
        const double fx = (camera.width / 2.0) / std::tan(deg2rad(camera.hfov_deg / 2.0));
        const double fy = (camera.height / 2.0) / std::tan(deg2rad(camera.vfov_deg / 2.0));
        cx = (col - camera.width / 2.0) / fx;
        cy = (camera.height / 2.0 - row) / fy;
        cz = 1.0;
        const double n = std::sqrt(cx * cx + cy * cy + cz * cz);
        cx /= n;
        cy /= n;
        cz /= n;
    }

    // Rotate clockwise (seen from above) by the heading about the vertical axis.
    const double h = deg2rad(heading_deg);
    const double c = std::cos(h);
    const double s = std::sin(h);
    return {cx * c + cz * s, cy, -cx * s + cz * c};
}

ReducedDepth reduce_depth_view(const DepthImage& view) {
    if (view.width <= 0 || view.width % kReducedColumns != 0)
        throw ConfigError("depth view width must be divisible by 30, got " + std::to_string(view.width));
    const int group = view.width / kReducedColumns;

    ReducedDepth out;
    out.height = view.height;
    out.values.assign(static_cast<std::size_t>(view.height) * kReducedColumns, 0.0);
    out.source_cols.assign(out.values.size(), 0);
    for (int row = 0; row < view.height; ++row) {
        for (int n = 0; n < kReducedColumns; ++n) {
            double best = std::numeric_limits<double>::infinity();
            int best_col = n * group;
            for (int col = n * group; col < (n + 1) * group; ++col) {
                const double d = view.at(col, row);
                if (d < best) {
                    best = d;
                    best_col = col;
                }
            }
            const auto idx = static_cast<std::size_t>(row) * kReducedColumns + n;
            out.values[idx] = best;
            out.source_cols[idx] = best_col;
        }
    }
    return out;
}

Vec3 column_min_point(const ReducedDepth& reduced, const DepthCamera& camera, double heading_deg, int n) {
    if (n < 0 || n >= kReducedColumns) throw IndexError("reduced column " + std::to_string(n) + " out of range");
    if (reduced.height != camera.height) throw ValidationError("reduced depth height does not match the camera");

    const double centre = camera.height / 2.0;
    int best_row = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int row = 0; row < reduced.height; ++row) {
        const double d = reduced.at(n, row);
        if (d < best || (d == best && std::abs(row - centre) < std::abs(best_row - centre))) {
            best = d;
            best_row = row;
        }
    }
    int col = n * (camera.width / kReducedColumns);
    if (!reduced.source_cols.empty())
        col = reduced.source_cols[static_cast<std::size_t>(best_row) * kReducedColumns + n];
    return ray_direction(camera, heading_deg, col, best_row) * best;
}

ShortestDistanceProfile shortest_distance_profile(const DepthPanorama& pano, const DepthCamera& camera) {
    camera.validate();
    pano.validate();
    if (pano.views[0].width != camera.width || pano.views[0].height != camera.height)
        throw ValidationError("panorama resolution does not match the camera");

    ShortestDistanceProfile profile;
    for (int v = 0; v < kViews; v += 3) {
        const auto& view = pano.views[static_cast<std::size_t>(v)];
        const ReducedDepth reduced = reduce_depth_view(view);
        for (int n = 0; n < kReducedColumns; ++n) {
            const Vec3 c = column_min_point(reduced, camera, view.heading_deg, n);
            // View v is centred at 30v degrees; its first group starts 45 degrees left.
            const int bin = ((10 * v - 15 + n) % kAngleBins + kAngleBins) % kAngleBins;
            profile.distances[static_cast<std::size_t>(bin)] = horizontal_distance(c);
        }
    }
    return profile;
}

OccupancyMask occupancy_mask(const ShortestDistanceProfile& profile) {
    OccupancyMask mask;
    for (int k = 0; k < kAngleBins; ++k) {
        const double limit = profile.distances[static_cast<std::size_t>(k)];
        for (int j = 0; j < kDistBins; ++j) mask.at(k, j) = dist_bin_value(j) <= limit ? 1 : 0;
    }
    return mask;
}

}  // namespace waynav
