// Serial reference vs OpenMP variant for each kernel.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "waynav/kernels.hpp"
#include "waynav/scenes.hpp"

using namespace waynav;

namespace {

const scenes::RoomScene& room() {
    static const auto scene = [] {
        std::mt19937_64 rng(1);
        return scenes::random_room(rng);
    }();
    return scene;
}

template <auto Kernel>
void bm_cast_rays(benchmark::State& state) {
    std::vector<double> bearings(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < bearings.size(); ++i) bearings[i] = 360.0 * static_cast<double>(i) / static_cast<double>(bearings.size());
    std::vector<double> out(bearings.size());
    for (auto _ : state) {
        Kernel(room().plan, room().pose.position(), bearings, 3.25, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Kernel>
void bm_clearance_grid(benchmark::State& state) {
    const auto& bd = room().plan.bounds;
    const double res = 0.05;
    const kernels::GridSpec spec{bd.min_x, bd.min_z, res, static_cast<int>((bd.max_x - bd.min_x) / res),
                                 static_cast<int>((bd.max_z - bd.min_z) / res)};
    std::vector<double> out(static_cast<std::size_t>(spec.cols) * static_cast<std::size_t>(spec.rows));
    for (auto _ : state) {
        Kernel(room().plan, spec, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

template <auto Kernel>
void bm_nearest(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<Vec2> from(static_cast<std::size_t>(state.range(0))), to(from.size());
    for (auto& p : from) p = {u(rng), u(rng)};
    for (auto& p : to) p = {u(rng), u(rng)};
    std::vector<double> out(from.size());
    for (auto _ : state) {
        Kernel(from, to, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_cast_rays<kernels::cast_rays_serial>)->Name("cast_rays/serial")->Arg(960)->Arg(7680);
BENCHMARK(bm_cast_rays<kernels::cast_rays_parallel>)->Name("cast_rays/parallel")->Arg(960)->Arg(7680);
BENCHMARK(bm_clearance_grid<kernels::clearance_grid_serial>)->Name("clearance_grid/serial");
BENCHMARK(bm_clearance_grid<kernels::clearance_grid_parallel>)->Name("clearance_grid/parallel");
BENCHMARK(bm_nearest<kernels::nearest_distances_serial>)->Name("nearest_distances/serial")->Arg(256)->Arg(2048);
BENCHMARK(bm_nearest<kernels::nearest_distances_parallel>)->Name("nearest_distances/parallel")->Arg(256)->Arg(2048);

BENCHMARK_MAIN();
