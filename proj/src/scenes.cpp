#include "waynav/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace waynav::scenes {

namespace {

constexpr std::array<const char*, 10> kLabels{"table", "chair", "sofa", "bed", "plant",
                                              "tv",    "lamp",  "cabinet", "desk", "sink"};

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Adds the wall a->b with the given door gaps (fractions along the wall are derived
// from metric offsets) and records the gap centres.
void add_wall_with_doors(FloorPlan& plan, std::vector<Vec2>& centres, Vec2 a, Vec2 b, int doors, std::mt19937_64& rng) {
    const double len = distance(a, b);
    const Vec2 dir = (b - a) * (1.0 / len);
    std::vector<std::pair<double, double>> gaps;
    for (int attempt = 0; attempt < 40 && static_cast<int>(gaps.size()) < doors; ++attempt) {
        const double width = uniform(rng, 0.9, 1.4);
        const double lo = uniform(rng, 0.35, len - 0.35 - width);
        if (lo < 0.35) continue;
        const double hi = lo + width;
        const bool overlaps = std::any_of(gaps.begin(), gaps.end(), [&](const auto& g) {
            return lo < g.second + 0.5 && hi > g.first - 0.5;
        });
        if (!overlaps) gaps.emplace_back(lo, hi);
    }
    std::sort(gaps.begin(), gaps.end());
    double cursor = 0.0;
    for (const auto& [lo, hi] : gaps) {
        plan.walls.push_back({a + dir * cursor, a + dir * lo});
        centres.push_back(a + dir * (0.5 * (lo + hi)));
        cursor = hi;
    }
    plan.walls.push_back({a + dir * cursor, b});
}

bool line_of_sight(const FloorPlan& plan, Vec2 from, Vec2 to) {
    const double d = distance(from, to);
    return raycast(plan, from, bearing_of(to - from), d) >= d - 1e-9;
}

}  // namespace

std::vector<PolarPoint> visible_door_waypoints(const FloorPlan& plan, const AgentPose& pose,
                                               const std::vector<Vec2>& door_centres) {
    std::vector<PolarPoint> out;
    for (const Vec2& c : door_centres) {
        const Vec2 off = c - pose.position();
        const double d = norm(off);
        if (d <= kDistStep || d > kMaxWaypointDist) continue;
        if (!line_of_sight(plan, pose.position(), c)) continue;
        out.push_back({wrap_degrees(bearing_of(off) - pose.heading_deg), d});
    }
    return out;
}

RoomScene random_room(std::mt19937_64& rng, bool clutter) {
    for (;;) {
        RoomScene scene;
        FloorPlan& plan = scene.plan;
        constexpr double kHall = 8.0;
        plan.bounds = {-kHall, -kHall, kHall, kHall};
        plan.walls = {{{-kHall, -kHall}, {kHall, -kHall}},
                      {{kHall, -kHall}, {kHall, kHall}},
                      {{kHall, kHall}, {-kHall, kHall}},
                      {{-kHall, kHall}, {-kHall, -kHall}}};

        const double w = uniform(rng, 3.5, 6.5);
        const double h = uniform(rng, 3.5, 6.5);
        const double cx = uniform(rng, -1.0, 1.0);
        const double cz = uniform(rng, -1.0, 1.0);
        const std::array<Vec2, 4> corners{Vec2{cx - w / 2, cz - h / 2}, Vec2{cx + w / 2, cz - h / 2},
                                          Vec2{cx + w / 2, cz + h / 2}, Vec2{cx - w / 2, cz + h / 2}};
        std::array<int, 4> doors{};
        for (auto& d : doors) d = uniform_int(rng, 0, 3) == 0 ? 0 : uniform_int(rng, 1, 2);
        if (std::all_of(doors.begin(), doors.end(), [](int d) { return d == 0; })) doors[uniform_int(rng, 0, 3)] = 1;
        for (int side = 0; side < 4; ++side)
            add_wall_with_doors(plan, scene.door_centres, corners[side], corners[(side + 1) % 4], doors[side], rng);

        if (clutter) {
            const int pieces = uniform_int(rng, 0, 2);
            for (int p = 0; p < pieces; ++p) {
                const Vec2 c{uniform(rng, cx - w / 2 + 1.0, cx + w / 2 - 1.0), uniform(rng, cz - h / 2 + 1.0, cz + h / 2 - 1.0)};
                if (uniform_int(rng, 0, 1) == 0) {
                    const double s = uniform(rng, 0.15, 0.35);
                    plan.walls.push_back({{c.x - s, c.z - s}, {c.x + s, c.z - s}});
                    plan.walls.push_back({{c.x + s, c.z - s}, {c.x + s, c.z + s}});
                    plan.walls.push_back({{c.x + s, c.z + s}, {c.x - s, c.z + s}});
                    plan.walls.push_back({{c.x - s, c.z + s}, {c.x - s, c.z - s}});
                } else {
                    const Vec2 d = unit_from_bearing(uniform(rng, 0.0, 180.0)) * uniform(rng, 0.4, 0.9);
                    plan.walls.push_back({c - d, c + d});
                }
            }
        }

        const int n_objects = uniform_int(rng, 2, 4);
        for (int i = 0; i < n_objects; ++i) {
            const Vec2 p{uniform(rng, cx - w / 2 + 0.3, cx + w / 2 - 0.3), uniform(rng, cz - h / 2 + 0.3, cz + h / 2 - 0.3)};
            plan.objects.push_back({kLabels[static_cast<std::size_t>(uniform_int(rng, 0, kLabels.size() - 1))], p, 0.25});
        }

        for (int attempt = 0; attempt < 200; ++attempt) {
            const AgentPose pose{uniform(rng, cx - w / 2 + 0.4, cx + w / 2 - 0.4), uniform(rng, cz - h / 2 + 0.4, cz + h / 2 - 0.4),
                                 uniform(rng, 0.0, 360.0)};
            if (plan.clearance(pose.position()) < 0.4) continue;
            auto gt = visible_door_waypoints(plan, pose, scene.door_centres);
            if (gt.empty()) continue;
            scene.pose = pose;
            scene.gt_waypoints = std::move(gt);
            return scene;
        }
    }
}

NavigationScene trap_corridor(int variant) {
    const std::array<double, 4> lengths{5.5, 6.0, 6.5, 7.0};
    const std::array<double, 3> half_widths{0.6, 0.7, 0.8};
    const double len = lengths[static_cast<std::size_t>(variant % 4)];
    const double hw = half_widths[static_cast<std::size_t>(variant % 3)];
    const double mirror = (variant / 2) % 2 == 0 ? 1.0 : -1.0;
    const double rotation = 37.0 * variant;
    const double side = 2.0;  // width of the side passage

    // Layout in a local frame (x mirrored for odd pairs): dead-end corridor
    // x in [-hw, hw], z in [-0.6, len]; side passage x in [hw, hw + side] running up
    // to a top hall z in [len + 2, len + 5] that holds the goal.
    const double top = len + 2.0;
    const double roof = len + 5.0;
    const double east = hw + side;
    const double west = -2.0;
    std::vector<Wall> local{
        {{-hw, -0.6}, {east, -0.6}},     // floor of corridor and passage
        {{-hw, -0.6}, {-hw, len}},       // corridor west wall
        {{-hw, len}, {hw, len}},         // dead-end cap
        {{hw, 0.75}, {hw, len}},         // corridor east wall above the side door
        {{hw, -0.6}, {hw, -0.55}},       // door jamb stub below the door
        {{east, -0.6}, {east, roof}},    // passage east wall
        {{hw, len}, {hw, top}},          // passage west wall up to the hall
        {{west, top}, {hw, top}},        // hall floor
        {{west, top}, {west, roof}},     // hall west wall
        {{west, roof}, {east, roof}},    // hall roof
    };
    const Vec2 goal_local{-0.3 * (variant % 3), len + 3.5};

    const double r = deg2rad(rotation);
    auto xf = [&](Vec2 p) {
        const Vec2 m{p.x * mirror, p.z};
        return Vec2{m.x * std::cos(r) + m.z * std::sin(r), -m.x * std::sin(r) + m.z * std::cos(r)};
    };

    NavigationScene scene;
    double min_x = 0, min_z = 0, max_x = 0, max_z = 0;
    for (const Wall& w : local) {
        const Wall t{xf(w.a), xf(w.b)};
        for (Vec2 p : {t.a, t.b}) {
            min_x = std::min(min_x, p.x);
            min_z = std::min(min_z, p.z);
            max_x = std::max(max_x, p.x);
            max_z = std::max(max_z, p.z);
        }
        scene.plan.walls.push_back(t);
    }
    scene.plan.bounds = {min_x - 0.5, min_z - 0.5, max_x + 0.5, max_z + 0.5};
    scene.plan.objects = {{"sofa", xf({0.5 * mirror * 0 + 1.0, len + 4.2}), 0.3},
                          {"plant", xf({hw + 1.0, 1.5}), 0.2},
                          {"cabinet", xf({0.0, len - 0.3}), 0.2}};
    scene.episode.id = "trap-" + std::to_string(variant);
    scene.episode.start = {0.0, 0.0, wrap_degrees(rotation)};
    scene.episode.goal = xf(goal_local);
    scene.episode.instruction = "Walk past the plant and go to the sofa in the hall beyond the corridor.";
    return scene;
}

}  // namespace waynav::scenes
