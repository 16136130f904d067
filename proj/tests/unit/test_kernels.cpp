#include <doctest.h>

#include <random>
#include <vector>

#include "waynav/kernels.hpp"
#include "waynav/scenes.hpp"

using namespace waynav;

TEST_CASE("cast_rays: serial and parallel agree exactly") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 10; ++t) {
        const auto scene = scenes::random_room(rng);
        std::vector<double> bearings(2880);
        for (std::size_t i = 0; i < bearings.size(); ++i) bearings[i] = 0.125 * static_cast<double>(i);
        std::vector<double> a(bearings.size()), b(bearings.size());
        kernels::cast_rays_serial(scene.plan, scene.pose.position(), bearings, 3.25, a);
        kernels::cast_rays_parallel(scene.plan, scene.pose.position(), bearings, 3.25, b);
        CHECK(a == b);
    }
}

TEST_CASE("clearance_grid: serial and parallel agree exactly") {
    std::mt19937_64 rng(2);
    const auto scene = scenes::random_room(rng);
    const auto& bd = scene.plan.bounds;
    kernels::GridSpec spec{bd.min_x, bd.min_z, 0.05, static_cast<int>((bd.max_x - bd.min_x) / 0.05),
                           static_cast<int>((bd.max_z - bd.min_z) / 0.05)};
    std::vector<double> a(static_cast<std::size_t>(spec.cols) * spec.rows), b(a.size());
    kernels::clearance_grid_serial(scene.plan, spec, a);
    kernels::clearance_grid_parallel(scene.plan, spec, b);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); i += 101) {
        const Vec2 c{spec.origin_x + (static_cast<double>(i % static_cast<std::size_t>(spec.cols)) + 0.5) * 0.05,
                     spec.origin_z + (static_cast<double>(i / static_cast<std::size_t>(spec.cols)) + 0.5) * 0.05};
        CHECK(a[i] == doctest::Approx(scene.plan.clearance(c)).epsilon(1e-12));
    }
}

TEST_CASE("nearest_distances: serial, parallel and brute force agree") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<Vec2> from(500), to(300);
    for (auto& p : from) p = {u(rng), u(rng)};
    for (auto& p : to) p = {u(rng), u(rng)};
    std::vector<double> a(from.size()), b(from.size());
    kernels::nearest_distances_serial(from, to, a);
    kernels::nearest_distances_parallel(from, to, b);
    CHECK(a == b);
    for (std::size_t i = 0; i < from.size(); ++i) {
        double best = 1e300;
        for (const auto& q : to) best = std::min(best, distance(from[i], q));
        CHECK(a[i] == best);
    }
    CHECK(kernels::max_threads() >= 1);
}
