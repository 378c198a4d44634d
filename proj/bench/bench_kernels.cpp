#include <benchmark/benchmark.h>

#include <cmath>

#include "psp/errors.hpp"
#include "psp/kernels.hpp"
#include "psp/surfaces.hpp"

using namespace psp;

namespace {

struct Fixture {
  ModelPtr model = make_telegraph2d(1.0, 2.0);
  std::vector<EventTrajectory> paths = kernels::simulate_batch_parallel(model, 20.0, 1, 0, 400);
  Dataset data = kernels::sample_batch_parallel(paths, 201);
  kernels::SliceSet slices = kernels::time_slices(data);
  kernels::SliceSet per_traj = kernels::trajectory_slices(data);
  std::vector<std::optional<Bandwidth>> slice_bws;
  std::vector<Bandwidth> traj_bws;
  std::vector<double> weights;
  std::vector<Vec2> points;
  std::vector<double> point_weights;

  Fixture() {
    for (std::size_t j = 0; j < slices.count(); ++j) {
      try {
        slice_bws.push_back(select_bandwidth(slices.slice(j), 2, BandwidthMethod::automatic));
      } catch (const DegenerateSamplesError &) {
        slice_bws.push_back(std::nullopt);
      }
    }
    for (std::size_t i = 0; i < per_traj.count(); ++i) {
      try {
        traj_bws.push_back(select_bandwidth(per_traj.slice(i), 2, BandwidthMethod::automatic));
      } catch (const DegenerateSamplesError &) {
        traj_bws.push_back(Bandwidth::matrix2(0.1, 0.0, 0.1));
      }
    }
    weights.assign(slices.count(), 0.1);
    for (const auto &node : quadrature_nodes(make_square(2.0), 0.1)) {
      points.push_back(node.point);
      point_weights.push_back(node.weight);
    }
  }
};

const Fixture &fixture() {
  static const Fixture f;
  return f;
}

void BM_TimeIntegratedDensitySerial(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::time_integrated_density_serial(f.slices, f.slice_bws, f.weights, f.points));
  }
}

void BM_TimeIntegratedDensityParallel(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::time_integrated_density_parallel(f.slices, f.slice_bws, f.weights, f.points));
  }
}

void BM_WeightedDensitySerial(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::weighted_density_serial(f.per_traj, f.traj_bws, f.points, f.point_weights));
  }
}

void BM_WeightedDensityParallel(benchmark::State &state) {
  const auto &f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::weighted_density_parallel(f.per_traj, f.traj_bws, f.points, f.point_weights));
  }
}

void BM_SimulateSerial(benchmark::State &state) {
  const auto model = make_pdsa(7.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::simulate_batch_serial(model, 100.0, 1, 0, static_cast<std::size_t>(state.range(0))));
  }
}

void BM_SimulateParallel(benchmark::State &state) {
  const auto model = make_pdsa(7.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::simulate_batch_parallel(model, 100.0, 1, 0, static_cast<std::size_t>(state.range(0))));
  }
}

void BM_CountExactSerial(benchmark::State &state) {
  const auto &f = fixture();
  const Surface square = make_square(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::count_exact_serial(f.paths, square));
}

void BM_CountExactParallel(benchmark::State &state) {
  const auto &f = fixture();
  const Surface square = make_square(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::count_exact_parallel(f.paths, square));
}

} // namespace

BENCHMARK(BM_TimeIntegratedDensitySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TimeIntegratedDensityParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WeightedDensitySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeightedDensityParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SimulateSerial)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateParallel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CountExactSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountExactParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
