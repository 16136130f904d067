#pragma once

// Navigation metrics over episode traces and point-set metrics for waypoint predictors.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waynav/heatmap.hpp"
#include "waynav/polar_geometry.hpp"
#include "waynav/trace.hpp"
#include "waynav/world.hpp"

namespace waynav {

struct NavMetrics {
    double tl = 0.0;
    double ne = 0.0;
    double osr = 0.0;
    double sr = 0.0;
    double spl = 0.0;
    double collisions = 0.0;
};

struct EpisodeMetrics {
    std::string episode_id;
    int steps = 0;
    double shortest = 0.0;
    bool stopped = false;
    bool aborted = false;
    NavMetrics m;
};

double trajectory_length(const EpisodeTrace& trace);
// Geodesic distance from the final pose to the goal; kUnreachable when disconnected.
double navigation_error(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan);
// Stopped (not aborted, not truncated) with NE within the threshold.
bool success(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan, double threshold = 3.0);
// Any pose along the trace within the threshold.
bool oracle_success(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan, double threshold = 3.0);
double spl(bool succeeded, double shortest, double tl);
// Collided steps over all steps; 0 when there are no steps.
double collision_rate(const std::vector<EpisodeTrace>& traces);

double chamfer(std::span<const Vec2> a, std::span<const Vec2> b);
double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b);

// Per-episode metrics sharing one goal distance field.
EpisodeMetrics evaluate_episode(const EpisodeTrace& trace, const FloorPlan& plan, double threshold = 3.0);
// Means over episodes, except collisions which pools steps across episodes.
NavMetrics aggregate(const std::vector<EpisodeMetrics>& episodes, const std::vector<EpisodeTrace>& traces);

struct WaypointMetrics {
    double delta = 0.0;
    // Unset when the predicted set (or, for distances, either set) is empty.
    std::optional<double> pct_open;
    std::optional<double> d_c;
    std::optional<double> d_h;
    std::optional<double> s_way;
};

WaypointMetrics waypoint_metrics(const std::vector<Waypoint>& predicted, const std::vector<PolarPoint>& gt,
                                 const OccupancyMask& mask, const PolarHeatmap& p_star);

// Field-wise means over the rows where the field is set.
WaypointMetrics mean_waypoint_metrics(const std::vector<WaypointMetrics>& rows);

}  // namespace waynav
