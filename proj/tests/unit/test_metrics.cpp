#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "waynav/errors.hpp"
#include "waynav/metrics.hpp"
#include "waynav/navigator.hpp"

using namespace waynav;

namespace {

EpisodeTrace make_trace(const std::vector<Vec2>& points, bool stop, Vec2 goal = {0, 0},
                        const std::vector<bool>& collided = {}) {
    EpisodeTrace t;
    t.episode_id = "t";
    t.start = {points[0].x, points[0].z, 0};
    t.goal = goal;
    for (std::size_t i = 1; i < points.size(); ++i) {
        StepRecord s;
        s.step = static_cast<int>(i);
        s.kind = ActionKind::move_to_waypoint;
        s.pose = {points[i].x, points[i].z, 0};
        s.collided = i - 1 < collided.size() && collided[i - 1];
        t.steps.push_back(s);
    }
    if (stop) {
        StepRecord s;
        s.step = static_cast<int>(points.size());
        s.kind = ActionKind::stop;
        s.pose = {points.back().x, points.back().z, 0};
        t.steps.push_back(s);
    }
    return t;
}

const FloorPlan& open_plan() {
    static const FloorPlan p{{-10, -10, 10, 10}, {}, {}};
    return p;
}

// Wall along x = 0 from z = -10 to z = 2.
const FloorPlan& wall_plan() {
    static const FloorPlan p{{-10, -10, 10, 10}, {{{0, -10}, {0, 2}}}, {}};
    return p;
}

}  // namespace

TEST_CASE("trace invariants: poses, actions, collisions") {
    const auto t = make_trace({{0, 0}, {1, 0}, {1, 1}}, true, {0, 0}, {false, true});
    CHECK(t.poses().size() == t.actions().size() + 1);
    CHECK(t.collisions().size() == t.actions().size());
    CHECK(t.collisions()[1]);
}

TEST_CASE("trajectory_length examples") {
    CHECK(trajectory_length(make_trace({{1, 1}}, false)) == 0.0);
    CHECK(trajectory_length(make_trace({{0, 0}, {0, 2}}, false)) == doctest::Approx(2.0));
    const std::vector<Vec2> zig{{0, 0}, {1, 1}, {2, 0}, {3, 1}, {3, 3}};
    const double hand = 3 * std::sqrt(2.0) + 2.0;
    CHECK(trajectory_length(make_trace(zig, true)) == doctest::Approx(hand));
}

TEST_CASE("navigation_error examples") {
    CHECK(navigation_error(make_trace({{0, 0}, {2, 2}}, true), {2, 2}, open_plan()) == doctest::Approx(0.0));
    CHECK(navigation_error(make_trace({{0, 0}, {1, 1}}, true), {1, 6}, open_plan()) == doctest::Approx(5.0).epsilon(0.03));
    CHECK(navigation_error(make_trace({{0, 0}, {-1, 1}}, true), {-1, 4.5}, open_plan()) == doctest::Approx(3.5).epsilon(0.03));
    const Vec2 end{-2, -2}, goal{2, -2};
    const double ne = navigation_error(make_trace({{-3, -3}, end}, true), goal, wall_plan());
    CHECK(ne == doctest::Approx(oracle::grid_geodesic(wall_plan(), end, goal)).epsilon(0.03));
    CHECK(ne > 8.0);

    const FloorPlan split{{-10, -10, 10, 10}, {{{0, -10}, {0, 10}}}, {}};
    CHECK(navigation_error(make_trace({{-2, 0}}, true), {2, 0}, split) == kUnreachable);
}

TEST_CASE("success examples and thresholds") {
    const Vec2 goal{0, 2.9};
    const auto stopped = make_trace({{-1, 0}, {0, 0}}, true, goal);
    const auto truncated = make_trace({{-1, 0}, {0, 0}}, false, goal);
    CHECK(success(stopped, goal, open_plan(), 3.0));
    CHECK_FALSE(success(truncated, goal, open_plan(), 3.0));
    CHECK_FALSE(success(stopped, goal, open_plan(), 2.0));
    auto aborted = stopped;
    aborted.aborted = true;
    CHECK_FALSE(success(aborted, goal, open_plan(), 3.0));
}

TEST_CASE("oracle_success examples") {
    const Vec2 goal{5, 0};
    CHECK(oracle_success(make_trace({{0, 0}, {4, 0}, {0, 0}}, true, goal), goal, open_plan(), 3.0));
    CHECK_FALSE(oracle_success(make_trace({{0, 0}, {-1, 0}}, true, goal), goal, open_plan(), 3.0));
    CHECK(oracle_success(make_trace({{2.5, 0}}, false, goal), goal, open_plan(), 3.0));
}

TEST_CASE("success implies oracle success; sr <= osr; spl <= sr") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-8, 8);
    std::uniform_int_distribution<int> len(1, 6), coin(0, 1);
    std::vector<EpisodeMetrics> eps;
    std::vector<EpisodeTrace> traces;
    for (int t = 0; t < 100; ++t) {
        const Vec2 goal{u(rng), u(rng)};
        std::vector<Vec2> pts{{u(rng), u(rng)}};
        const int n = len(rng);
        for (int i = 0; i < n; ++i) pts.push_back(coin(rng) ? Vec2{goal.x + u(rng) / 4, goal.z + u(rng) / 4} : Vec2{u(rng), u(rng)});
        auto tr = make_trace(pts, coin(rng) == 1, goal);
        if (success(tr, goal, open_plan())) CHECK(oracle_success(tr, goal, open_plan()));
        if (distance(tr.start.position(), goal) < 0.1) continue;
        const auto m = evaluate_episode(tr, open_plan());
        CHECK(m.m.spl <= m.m.sr);
        CHECK(m.m.sr <= m.m.osr);
        eps.push_back(m);
        traces.push_back(tr);
    }
    const NavMetrics agg = aggregate(eps, traces);
    CHECK(agg.sr <= agg.osr);
    CHECK(agg.spl <= agg.sr);
    CHECK(agg.tl >= 0.0);
    CHECK(agg.collisions >= 0.0);
    CHECK(agg.collisions <= 1.0);
}

TEST_CASE("spl examples") {
    CHECK(spl(true, 4.0, 4.0) == 1.0);
    CHECK(spl(true, 4.0, 8.0) == 0.5);
    CHECK(spl(true, 4.0, 2.0) == 1.0);
    CHECK(spl(false, 4.0, 4.0) == 0.0);
    CHECK_THROWS_AS(spl(true, 0.0, 4.0), ValidationError);
    CHECK_THROWS_AS(spl(false, -1.0, 4.0), ValidationError);
}

TEST_CASE("collision_rate examples") {
    const auto clean = make_trace({{0, 0}, {1, 0}, {2, 0}}, true);
    CHECK(collision_rate({clean}) == 0.0);
    std::vector<Vec2> pts(16);
    for (int i = 0; i < 16; ++i) pts[static_cast<std::size_t>(i)] = {0.1 * i, 0};
    std::vector<bool> one(15, false);
    one[7] = true;
    CHECK(collision_rate({make_trace(pts, false, {0, 0}, one)}) == doctest::Approx(1.0 / 15.0));
    CHECK(collision_rate({make_trace(pts, false, {0, 0}, one)}) == doctest::Approx(0.067).epsilon(0.01));
    CHECK(collision_rate({make_trace({{0, 0}, {1, 0}}, false, {0, 0}, {true})}) == 1.0);
    // pooled over steps, not averaged per episode
    CHECK(collision_rate({make_trace({{0, 0}, {1, 0}}, false, {0, 0}, {true}), clean}) == doctest::Approx(1.0 / 4.0));
    CHECK(collision_rate({}) == 0.0);
}

TEST_CASE("chamfer and hausdorff examples") {
    const std::vector<Vec2> a{{0, 0}, {1, 2}, {3, 1}};
    CHECK(chamfer(a, a) == 0.0);
    CHECK(hausdorff(a, a) == 0.0);
    const std::vector<Vec2> p{{0, 0}}, q{{1, 0}};
    CHECK(chamfer(p, q) == doctest::Approx(1.0));
    const std::vector<Vec2> two{{0, 0}, {5, 0}};
    CHECK(hausdorff(two, p) == doctest::Approx(5.0));
    CHECK(hausdorff(p, two) == doctest::Approx(5.0));
    CHECK_THROWS_AS(chamfer({}, p), ValidationError);
    CHECK_THROWS_AS(hausdorff(p, {}), ValidationError);
}

TEST_CASE("chamfer and hausdorff against brute force, with properties") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3, 3);
    std::uniform_int_distribution<int> size(1, 12);
    for (int t = 0; t < 100; ++t) {
        std::vector<Vec2> a(static_cast<std::size_t>(size(rng))), b(static_cast<std::size_t>(size(rng)));
        for (auto& v : a) v = {u(rng), u(rng)};
        for (auto& v : b) v = {u(rng), u(rng)};
        const double c = chamfer(a, b);
        const double h = hausdorff(a, b);
        CHECK(c == doctest::Approx(oracle::chamfer(a, b)).epsilon(1e-12));
        CHECK(h == doctest::Approx(oracle::hausdorff(a, b)).epsilon(1e-12));
        CHECK(h >= c);
        CHECK(chamfer(b, a) == doctest::Approx(c).epsilon(1e-12));
        CHECK(hausdorff(b, a) == h);
        for (const auto& x : a) CHECK(h >= oracle::nearest(x, b));
        for (const auto& x : b) CHECK(h >= oracle::nearest(x, a));
        const Vec2 extra{u(rng), u(rng)};
        auto a2 = a, b2 = b;
        a2.push_back(extra);
        b2.push_back(extra);
        CHECK(hausdorff(a2, b2) <= h + 1e-12);
    }
}

TEST_CASE("waypoint_metrics examples") {
    OccupancyMask mask;
    for (int j = 0; j < kDistBins; ++j) mask.at(10, j) = 1;
    const std::vector<Waypoint> pred{{10, 3, 0.9}, {50, 3, 0.8}};
    std::vector<PolarPoint> gt{polar_to_metric(pred[0]), polar_to_metric(pred[1])};
    const PolarHeatmap p_star = target_heatmap(gt);
    auto m = waypoint_metrics(pred, gt, mask, p_star);
    CHECK(m.delta == 0.0);
    CHECK(*m.d_c == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*m.d_h == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*m.pct_open == doctest::Approx(50.0));
    CHECK(*m.s_way == doctest::Approx(1.0));

    std::vector<PolarPoint> five(5, polar_to_metric(pred[0]));
    const std::vector<Waypoint> three{{10, 3, 1}, {20, 3, 1}, {30, 3, 1}};
    m = waypoint_metrics(three, five, mask, p_star);
    CHECK(m.delta == 2.0);
    CHECK(*m.pct_open >= 0.0);
    CHECK(*m.pct_open <= 100.0);

    m = waypoint_metrics({}, five, mask, p_star);
    CHECK(m.delta == 5.0);
    CHECK_FALSE(m.pct_open.has_value());
    CHECK_FALSE(m.d_c.has_value());
    CHECK_FALSE(m.d_h.has_value());

    m = waypoint_metrics(three, {}, mask, p_star);
    CHECK(m.delta == 3.0);
    CHECK(m.pct_open.has_value());
    CHECK_FALSE(m.d_c.has_value());

    const auto mean = mean_waypoint_metrics({waypoint_metrics(pred, gt, mask, p_star), waypoint_metrics({}, five, mask, p_star)});
    CHECK(mean.delta == doctest::Approx(2.5));
    CHECK(*mean.pct_open == doctest::Approx(50.0));
}

TEST_CASE("evaluate_episode on a greedy run") {
    const Episode ep{"e", {-3, -3, 0}, {3, -3}, "Go around the wall."};
    GreedyBackend greedy;
    const auto t = run_episode(wall_plan(), ep, greedy, OracleWaypointSource());
    const auto m = evaluate_episode(t, wall_plan());
    CHECK(m.shortest == doctest::Approx(oracle::grid_geodesic(wall_plan(), {-3, -3}, {3, -3})).epsilon(0.03));
    CHECK(m.m.tl == doctest::Approx(trajectory_length(t)));
    CHECK(m.steps == static_cast<int>(t.steps.size()));
    if (m.m.sr == 1.0) CHECK(m.m.spl == doctest::Approx(spl(true, m.shortest, m.m.tl)));
}
