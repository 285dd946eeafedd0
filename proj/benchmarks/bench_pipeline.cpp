#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "circlereg/conic.hpp"
#include "circlereg/correspondence.hpp"
#include "circlereg/detect_ingest.hpp"
#include "circlereg/homography.hpp"
#include "circlereg/synthcam.hpp"

namespace {

using namespace circlereg;

struct View {
  FieldTemplate tpl = standard_template();
  CameraSample cam;
  Homography h = Homography::identity();
  Conic ellipse = Conic(Eigen::Matrix3d::Identity());
  std::vector<Eigen::Vector2d> points;

  View() {
    std::mt19937_64 rng(5);
    cam = sample_camera(rng, {}, tpl);
    h = camera_to_homography(cam);
    ellipse = transform(h, tpl.center_circle().conic());
    for (int i = 0; i < 8; ++i) {
      const double t = 0.3 + 2.0 * 3.141592653589793 * i / 8;
      points.push_back(project(h, tpl.center_circle().radius * Eigen::Vector2d(std::cos(t), std::sin(t))));
    }
  }

  CircleObservation observation() const {
    CircleObservation obs(ellipse);
    obs.set_imaged_center(transform(h, HomPoint2(0, 0, 1)));
    obs.set_support_line({"halfway", transform(h, tpl.halfway_line())});
    return obs;
  }
};

const View& view() {
  static const View v;
  return v;
}

void BM_FitEllipse(benchmark::State& state) {
  const auto& pts = view().points;
  for (auto _ : state) benchmark::DoNotOptimize(fit_ellipse_direct(pts));
}
BENCHMARK(BM_FitEllipse);

void BM_DeriveCase1(benchmark::State& state) {
  const View& v = view();
  const CircleObservation obs = v.observation();
  for (auto _ : state) {
    benchmark::DoNotOptimize(extend_green_points(derive_case1(obs, v.tpl), v.ellipse, v.tpl));
  }
}
BENCHMARK(BM_DeriveCase1);

void BM_Dlt(benchmark::State& state) {
  const View& v = view();
  const DltProblem p =
      DltProblem::from(extend_green_points(derive_case1(v.observation(), v.tpl), v.ellipse, v.tpl));
  const DltOptions opts{.refine = state.range(0) != 0};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_homography_dlt(p, opts));
}
BENCHMARK(BM_Dlt)->Arg(0)->Arg(1);

void BM_RingEdges(benchmark::State& state) {
  const View& v = view();
  const FieldTemplate thick = standard_template({.thickness = 0.4});
  const MaskImage mask = rasterize_ring_mask(v.h, thick, 1920, 1080, 1);
  for (auto _ : state) benchmark::DoNotOptimize(extract_concentric_edges(mask, 1));
}
BENCHMARK(BM_RingEdges)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  SweepConfig c;
  c.cameras = 100;
  c.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_noise_sweep(c));
}
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
