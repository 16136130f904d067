#include "waynav/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>

#include "waynav/errors.hpp"
#include "waynav/kernels.hpp"

namespace waynav {

void FloorPlan::validate() const {
    if (!(bounds.max_x > bounds.min_x && bounds.max_z > bounds.min_z)) throw ValidationError("bounds: empty rectangle");
    for (std::size_t i = 0; i < walls.size(); ++i) {
        if (!bounds.contains(walls[i].a) || !bounds.contains(walls[i].b))
            throw ValidationError("walls[" + std::to_string(i) + "]: outside bounds");
        if (distance(walls[i].a, walls[i].b) <= 0.0)
            throw ValidationError("walls[" + std::to_string(i) + "]: zero length");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        if (o.label.empty()) throw ValidationError("objects[" + std::to_string(i) + "].label: empty");
        if (!(o.radius > 0.0)) throw ValidationError("objects[" + std::to_string(i) + "].radius: must be positive");
        if (!bounds.contains(o.position)) throw ValidationError("objects[" + std::to_string(i) + "]: outside bounds");
    }
}

double FloorPlan::clearance(Vec2 p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const Wall& w : walls) best = std::min(best, point_segment_distance(p, w.a, w.b));
    return best;
}

double raycast(const FloorPlan& plan, Vec2 origin, double bearing_deg, double max_range) {
    if (plan.clearance(origin) < 1e-9) throw PoseError("raycast origin lies on a wall");
    const std::array<double, 1> bearing{bearing_deg};
    std::array<double, 1> out{};
    kernels::cast_rays_serial(plan, origin, bearing, max_range, out);
    return out[0];
}

DepthPanorama render_depth_panorama(const FloorPlan& plan, const AgentPose& pose, const DepthCamera& camera) {
    camera.validate();
    const Vec2 origin = pose.position();
    if (plan.clearance(origin) < 1e-9) throw PoseError("render pose lies on a wall");

    const int w = camera.width;
    const int h = camera.height;

    // Horizontal length of each pixel's unit ray; rotation about the vertical axis
    // leaves it unchanged, so one table serves all views.
    std::vector<double> horizontal(static_cast<std::size_t>(w) * h);
    for (int row = 0; row < h; ++row)
        for (int col = 0; col < w; ++col) {
            const Vec3 d = ray_direction(camera, 0.0, col, row);
            horizontal[static_cast<std::size_t>(row) * w + col] = std::hypot(d.x, d.z);
        }

    std::vector<double> bearings(static_cast<std::size_t>(kViews) * w);
    for (int v = 0; v < kViews; ++v)
        for (int col = 0; col < w; ++col)
            bearings[static_cast<std::size_t>(v) * w + col] = pose.heading_deg + 30.0 * v + column_azimuth_deg(camera, col);
    std::vector<double> ranges(bearings.size());
    kernels::cast_rays_parallel(plan, origin, bearings, kMaxDepthRange, ranges);

    DepthPanorama pano;
    pano.views.reserve(kViews);
    for (int v = 0; v < kViews; ++v) {
        DepthImage img(w, h, pose.heading_deg + 30.0 * v);
        for (int row = 0; row < h; ++row)
            for (int col = 0; col < w; ++col) {
                const double r = ranges[static_cast<std::size_t>(v) * w + col];
                const double hs = horizontal[static_cast<std::size_t>(row) * w + col];
                img.at(col, row) = std::min(r / hs, kMaxDepthRange);
            }
        pano.views.push_back(std::move(img));
    }
    return pano;
}

std::vector<ObjectSighting> visible_objects(const FloorPlan& plan, const AgentPose& pose, int view_index) {
    if (view_index < 0 || view_index >= kViews) throw IndexError("view index out of range");
    const double view_heading = pose.heading_deg + 30.0 * view_index;
    const Vec2 origin = pose.position();

    std::vector<ObjectSighting> seen;
    for (const auto& obj : plan.objects) {
        const Vec2 offset = obj.position - origin;
        const double dist = norm(offset);
        if (dist <= 1e-9) continue;
        const double bearing = bearing_of(offset);
        const double rel = wrap_degrees(bearing - view_heading + 180.0) - 180.0;
        if (rel < -45.0 || rel >= 45.0) continue;
        const std::array<double, 1> b{bearing};
        std::array<double, 1> hit{};
        kernels::cast_rays_serial(plan, origin, b, dist, hit);
        if (hit[0] < dist - 1e-9) continue;  // occluded
        seen.push_back({obj.label, bearing, dist});
    }
    std::stable_sort(seen.begin(), seen.end(),
                     [](const ObjectSighting& a, const ObjectSighting& b) { return a.distance < b.distance; });
    return seen;
}

namespace {

// Segment-segment distance.
double segment_distance(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1) {
    const Vec2 r = p1 - p0;
    const Vec2 s = q1 - q0;
    const double denom = cross(r, s);
    if (std::abs(denom) > 1e-15) {
        const double t = cross(q0 - p0, s) / denom;
        const double u = cross(q0 - p0, r) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
    }
    return std::min({point_segment_distance(p0, q0, q1), point_segment_distance(p1, q0, q1),
                     point_segment_distance(q0, p0, p1), point_segment_distance(q1, p0, p1)});
}

// Largest safe fraction of the move p -> q against one wall. The clearance margin
// along the path is convex in the path parameter, so the unsafe set is one interval.
double safe_fraction(Vec2 p, Vec2 q, const Wall& w, double radius) {
    if (segment_distance(p, q, w.a, w.b) >= radius) return 1.0;
    const Vec2 u = q - p;
    auto margin = [&](double t) { return point_segment_distance(p + u * t, w.a, w.b) - radius; };

    // golden-section search for the minimum margin on [0, 1]
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0;
    double hi = 1.0;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = margin(x1);
    double f2 = margin(x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = margin(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = margin(x2);
        }
    }
    double t_min = 0.5 * (lo + hi);
    if (margin(0.0) < margin(t_min)) t_min = 0.0;
    if (margin(t_min) >= 0.0) return 1.0;
    if (margin(0.0) < 0.0) return 0.0;

    double safe = 0.0;
    double unsafe = t_min;
    for (int it = 0; it < 200 && unsafe - safe > 0.0; ++it) {
        const double mid = 0.5 * (safe + unsafe);
        if (mid <= safe || mid >= unsafe) break;
        if (margin(mid) >= 0.0)
            safe = mid;
        else
            unsafe = mid;
    }
    return safe;
}

}  // namespace

StepOutcome step_to(const AgentPose& pose, Vec2 target, const FloorPlan& plan) {
    const Vec2 start = pose.position();
    const Vec2 delta = target - start;
    const double length = norm(delta);
    if (length > kMaxDepthRange + 1e-9) throw RangeError("step target farther than 3.25 m");
    if (length == 0.0) return {pose, false, 0.0};

    double fraction = 1.0;
    for (const Wall& w : plan.walls) fraction = std::min(fraction, safe_fraction(start, target, w, kAgentRadius));

    StepOutcome out;
    out.collided = fraction < 1.0;
    const Vec2 end = out.collided ? start + delta * fraction : target;
    out.new_pose = {end.x, end.z, bearing_of(delta)};
    out.distance_traveled = distance(start, end);
    return out;
}

GeodesicGrid::GeodesicGrid(const FloorPlan& plan, double resolution, double agent_radius)
    : plan_(&plan), resolution_(resolution), agent_radius_(agent_radius) {
    cols_ = static_cast<int>(std::ceil((plan.bounds.max_x - plan.bounds.min_x) / resolution - 1e-9));
    rows_ = static_cast<int>(std::ceil((plan.bounds.max_z - plan.bounds.min_z) / resolution - 1e-9));
    kernels::GridSpec spec{plan.bounds.min_x, plan.bounds.min_z, resolution, cols_, rows_};
    std::vector<double> clearance(static_cast<std::size_t>(cols_) * rows_);
    kernels::clearance_grid_parallel(plan, spec, clearance);
    free_.resize(clearance.size());
    for (std::size_t i = 0; i < clearance.size(); ++i) free_[i] = clearance[i] >= agent_radius ? 1 : 0;
}

Vec2 GeodesicGrid::cell_centre(int cell) const {
    const int col = cell % cols_;
    const int row = cell / cols_;
    return {plan_->bounds.min_x + (col + 0.5) * resolution_, plan_->bounds.min_z + (row + 0.5) * resolution_};
}

int GeodesicGrid::snap(Vec2 p) const {
    if (!plan_->bounds.contains(p)) throw PoseError("point outside the floor plan bounds");
    if (plan_->clearance(p) < agent_radius_ - 1e-6) throw PoseError("point is not in free space");
    const int col = std::clamp(static_cast<int>((p.x - plan_->bounds.min_x) / resolution_), 0, cols_ - 1);
    const int row = std::clamp(static_cast<int>((p.z - plan_->bounds.min_z) / resolution_), 0, rows_ - 1);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int reach = 0; reach <= 4 && best < 0; ++reach) {
        for (int dr = -reach; dr <= reach; ++dr)
            for (int dc = -reach; dc <= reach; ++dc) {
                if (std::max(std::abs(dr), std::abs(dc)) != reach) continue;
                const int r = row + dr;
                const int c = col + dc;
                if (r < 0 || r >= rows_ || c < 0 || c >= cols_) continue;
                const int cell = r * cols_ + c;
                if (!free_[static_cast<std::size_t>(cell)]) continue;
                const double d = waynav::distance(p, cell_centre(cell));
                if (d < best_d) {
                    best_d = d;
                    best = cell;
                }
            }
    }
    return best;
}

namespace {

struct QueueItem {
    double priority;
    double cost;
    int cell;
    bool operator>(const QueueItem& o) const { return priority > o.priority || (priority == o.priority && cell > o.cell); }
};

// 16-connected moves: axial, diagonal and knight. A knight move also needs the two
// cells it crosses to be free.
constexpr std::array<int, 16> kDc{1, -1, 0, 0, 1, 1, -1, -1, 1, 1, -1, -1, 2, 2, -2, -2};
constexpr std::array<int, 16> kDr{0, 0, 1, -1, 1, -1, 1, -1, 2, -2, 2, -2, 1, -1, 1, -1};


}  // namespace

bool GeodesicGrid::line_of_sight(Vec2 a, Vec2 b) const {
    for (const Wall& w : plan_->walls)
        if (segment_distance(a, b, w.a, w.b) < agent_radius_ - 1e-6) return false;
    return true;
}

bool GeodesicGrid::free_at(int col, int row) const {
    return col >= 0 && col < cols_ && row >= 0 && row < rows_ && free_[static_cast<std::size_t>(row * cols_ + col)] != 0;
}

template <typename Visit>
void GeodesicGrid::for_each_move(int cell, Visit&& visit) const {
    const int col = cell % cols_;
    const int row = cell / cols_;
    for (std::size_t n = 0; n < kDc.size(); ++n) {
        const int dc = kDc[n];
        const int dr = kDr[n];
        if (!free_at(col + dc, row + dr)) continue;
        if (n >= 8) {
            // Cells crossed by the knight move.
            const int sc = std::abs(dc) == 2 ? dc / 2 : 0;
            const int sr = std::abs(dr) == 2 ? dr / 2 : 0;
            if (!free_at(col + sc, row + sr) || !free_at(col + dc - sc, row + dr - sr)) continue;
        }
        visit((row + dr) * cols_ + col + dc, resolution_ * std::hypot(dc, dr));
    }
}

double GeodesicGrid::distance(Vec2 a, Vec2 b) const {
    const int sa = snap(a);
    const int sb = snap(b);
    if (sa < 0 || sb < 0) return kUnreachable;
    if (sa == sb || line_of_sight(a, b)) return waynav::distance(a, b);

    const int goal_col = sb % cols_;
    const int goal_row = sb / cols_;
    auto heuristic = [&](int cell) {
        return resolution_ * std::hypot(cell % cols_ - goal_col, cell / cols_ - goal_row);
    };

    std::vector<double> cost(free_.size(), kUnreachable);
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;
    cost[static_cast<std::size_t>(sa)] = 0.0;
    open.push({heuristic(sa), 0.0, sa});
    while (!open.empty()) {
        const QueueItem cur = open.top();
        open.pop();
        if (cur.cost > cost[static_cast<std::size_t>(cur.cell)]) continue;
        if (cur.cell == sb) break;
        for_each_move(cur.cell, [&](int next, double step) {
            const double nc = cur.cost + step;
            if (nc < cost[static_cast<std::size_t>(next)]) {
                cost[static_cast<std::size_t>(next)] = nc;
                open.push({nc + heuristic(next), nc, next});
            }
        });
    }
    const double path = cost[static_cast<std::size_t>(sb)];
    if (path == kUnreachable) return kUnreachable;
    return path + waynav::distance(a, cell_centre(sa)) + waynav::distance(b, cell_centre(sb));
}

std::vector<double> GeodesicGrid::field_from(Vec2 source) const {
    std::vector<double> cost(free_.size(), kUnreachable);
    const int s = snap(source);
    if (s < 0) return cost;
    std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>> open;
    cost[static_cast<std::size_t>(s)] = 0.0;
    open.push({0.0, 0.0, s});
    while (!open.empty()) {
        const QueueItem cur = open.top();
        open.pop();
        if (cur.cost > cost[static_cast<std::size_t>(cur.cell)]) continue;
        for_each_move(cur.cell, [&](int next, double step) {
            const double nc = cur.cost + step;
            if (nc < cost[static_cast<std::size_t>(next)]) {
                cost[static_cast<std::size_t>(next)] = nc;
                open.push({nc, nc, next});
            }
        });
    }
    return cost;
}

double GeodesicGrid::lookup(const std::vector<double>& field, Vec2 source, Vec2 p) const {
    const int cell = snap(p);
    const int src = snap(source);
    if (cell < 0 || src < 0) return kUnreachable;
    if (cell == src || line_of_sight(p, source)) return waynav::distance(p, source);
    const double v = field[static_cast<std::size_t>(cell)];
    if (v == kUnreachable) return kUnreachable;
    return v + waynav::distance(p, cell_centre(cell)) + waynav::distance(source, cell_centre(src));
}

double geodesic_distance(const FloorPlan& plan, Vec2 a, Vec2 b) {
    const GeodesicGrid grid(plan);
    return grid.distance(a, b);
}

GoalDistanceField::GoalDistanceField(const FloorPlan& plan, Vec2 goal)
    : goal_(goal), grid_(plan), field_(grid_.field_from(goal)) {}

double GoalDistanceField::at(Vec2 p) const { return grid_.lookup(field_, goal_, p); }

}  // namespace waynav
