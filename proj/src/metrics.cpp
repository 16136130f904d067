#include "waynav/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "waynav/errors.hpp"
#include "waynav/kernels.hpp"

namespace waynav {

double trajectory_length(const EpisodeTrace& trace) {
    const auto poses = trace.poses();
    double total = 0.0;
    for (std::size_t i = 1; i < poses.size(); ++i) total += distance(poses[i - 1].position(), poses[i].position());
    return total;
}

double navigation_error(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan) {
    return geodesic_distance(plan, trace.poses().back().position(), goal);
}

bool success(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan, double threshold) {
    if (trace.aborted || !trace.stopped()) return false;
    return navigation_error(trace, goal, plan) <= threshold;
}

bool oracle_success(const EpisodeTrace& trace, Vec2 goal, const FloorPlan& plan, double threshold) {
    const GoalDistanceField field(plan, goal);
    const auto poses = trace.poses();
    return std::any_of(poses.begin(), poses.end(), [&](const AgentPose& p) { return field.at(p.position()) <= threshold; });
}

double spl(bool succeeded, double shortest, double tl) {
    if (!(shortest > 0.0)) throw ValidationError("spl: shortest path length must be positive");
    if (tl < 0.0) throw ValidationError("spl: trajectory length must be non-negative");
    return succeeded ? shortest / std::max(shortest, tl) : 0.0;
}

double collision_rate(const std::vector<EpisodeTrace>& traces) {
    std::size_t steps = 0;
    std::size_t hits = 0;
    for (const auto& t : traces)
        for (const auto& s : t.steps) {
            ++steps;
            hits += s.collided ? 1 : 0;
        }
    return steps == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(steps);
}

namespace {

std::vector<double> nearest(std::span<const Vec2> from, std::span<const Vec2> to) {
    std::vector<double> out(from.size());
    kernels::nearest_distances_parallel(from, to, out);
    return out;
}

void require_points(std::span<const Vec2> a, std::span<const Vec2> b, const char* what) {
    if (a.empty() || b.empty()) throw ValidationError(std::string(what) + ": point sets must be non-empty");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

double chamfer(std::span<const Vec2> a, std::span<const Vec2> b) {
    require_points(a, b, "chamfer");
    return 0.5 * (mean(nearest(a, b)) + mean(nearest(b, a)));
}

double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b) {
    require_points(a, b, "hausdorff");
    const auto ab = nearest(a, b);
    const auto ba = nearest(b, a);
    return std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
}

EpisodeMetrics evaluate_episode(const EpisodeTrace& trace, const FloorPlan& plan, double threshold) {
    const GoalDistanceField field(plan, trace.goal);
    const auto poses = trace.poses();
    EpisodeMetrics e;
    e.episode_id = trace.episode_id;
    e.steps = static_cast<int>(trace.steps.size());
    e.stopped = trace.stopped();
    e.aborted = trace.aborted;
    e.shortest = field.at(trace.start.position());
    e.m.tl = trajectory_length(trace);
    e.m.ne = field.at(poses.back().position());
    const bool ok = !trace.aborted && e.stopped && e.m.ne <= threshold;
    const bool oracle = std::any_of(poses.begin(), poses.end(),
                                    [&](const AgentPose& p) { return field.at(p.position()) <= threshold; });
    e.m.sr = ok ? 1.0 : 0.0;
    e.m.osr = oracle ? 1.0 : 0.0;
    e.m.spl = e.shortest > 0.0 ? spl(ok, e.shortest, e.m.tl) : e.m.sr;
    e.m.collisions = collision_rate({trace});
    return e;
}

NavMetrics aggregate(const std::vector<EpisodeMetrics>& episodes, const std::vector<EpisodeTrace>& traces) {
    NavMetrics out;
    if (episodes.empty()) return out;
    for (const auto& e : episodes) {
        out.tl += e.m.tl;
        out.ne += e.m.ne;
        out.osr += e.m.osr;
        out.sr += e.m.sr;
        out.spl += e.m.spl;
    }
    const double n = static_cast<double>(episodes.size());
    out.tl /= n;
    out.ne /= n;
    out.osr /= n;
    out.sr /= n;
    out.spl /= n;
    out.collisions = collision_rate(traces);
    return out;
}

WaypointMetrics waypoint_metrics(const std::vector<Waypoint>& predicted, const std::vector<PolarPoint>& gt,
                                 const OccupancyMask& mask, const PolarHeatmap& p_star) {
    WaypointMetrics out;
    out.delta = std::abs(static_cast<double>(predicted.size()) - static_cast<double>(gt.size()));
    if (predicted.empty()) return out;

    std::vector<Vec2> pred_pts;
    double open = 0.0;
    double score = 0.0;
    for (const auto& w : predicted) {
        pred_pts.push_back(polar_to_offset(polar_to_metric(w)));
        open += mask.at(w.angle_bin, w.dist_bin) ? 1.0 : 0.0;
        score += p_star.at(w.angle_bin, w.dist_bin);
    }
    const double n = static_cast<double>(predicted.size());
    out.pct_open = 100.0 * open / n;
    out.s_way = score / n;
    if (!gt.empty()) {
        std::vector<Vec2> gt_pts;
        for (const auto& p : gt) gt_pts.push_back(polar_to_offset(p));
        out.d_c = chamfer(pred_pts, gt_pts);
        out.d_h = hausdorff(pred_pts, gt_pts);
    }
    return out;
}

WaypointMetrics mean_waypoint_metrics(const std::vector<WaypointMetrics>& rows) {
    WaypointMetrics out;
    if (rows.empty()) return out;
    auto field_mean = [&](auto member) -> std::optional<double> {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows)
            if ((r.*member).has_value()) {
                sum += *(r.*member);
                ++count;
            }
        if (count == 0) return std::nullopt;
        return sum / count;
    };
    for (const auto& r : rows) out.delta += r.delta;
    out.delta /= static_cast<double>(rows.size());
    out.pct_open = field_mean(&WaypointMetrics::pct_open);
    out.d_c = field_mean(&WaypointMetrics::d_c);
    out.d_h = field_mean(&WaypointMetrics::d_h);
    out.s_way = field_mean(&WaypointMetrics::s_way);
    return out;
}

}  // namespace waynav
