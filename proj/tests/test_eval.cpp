#include <random>

#include "cmtext/eval.hpp"
#include "cmtext/labels.hpp"
#include "cmtext/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cmtext;

TEST_CASE("polygon_iou on rectangles") {
  TextPolygon a = make_rect(0, 0, 10, 10);
  TextPolygon b = make_rect(5, 0, 15, 10);
  CHECK(polygon_iou(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(polygon_iou(a, b) == doctest::Approx(50.0 / 150.0).epsilon(1e-9));
  CHECK(polygon_iou(a, make_rect(20, 20, 30, 30)) == 0.0);
  CHECK(polygon_iou(a, b) == polygon_iou(b, a));
}

TEST_CASE("polygon_iou against the grid oracle on random shapes") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 20; ++i) {
    TextPolygon a(oracles::random_convex(rng, {60, 60}, 40, 30, 9));
    TextPolygon b(oracles::random_convex(rng, {75, 60}, 35, 30, 8));
    const double got = polygon_iou(a, b);
    const double expect = oracles::grid_iou(a.vertices(), b.vertices(), 0.25);
    CHECK(got == doctest::Approx(expect).epsilon(0.03));

    // Containment bound.
    const double bound = std::min(a.area(), b.area()) / std::max(a.area(), b.area());
    CHECK(got <= bound + 1e-9);
  }

  // Non-convex: annular sectors against themselves and shifted copies.
  TextPolygon arc = make_annular_sector({50, 50}, 20, 40, 0.5, 3.0);
  CHECK(polygon_iou(arc, arc) == doctest::Approx(1.0).epsilon(1e-6));
  TextPolygon arc2 = arc.translated(6.0, -3.0);
  CHECK(polygon_iou(arc, arc2) ==
        doctest::Approx(oracles::grid_iou(arc.vertices(), arc2.vertices(), 0.2)).epsilon(0.05));
}

TEST_CASE("match_detections protocol") {
  TextPolygon g1 = make_rect(0, 0, 20, 10);
  TextPolygon g2 = make_rect(40, 0, 60, 10);

  SUBCASE("perfect single match") {
    std::vector<Detection> dets = {{g1, 0.9}};
    EvalResult r = match_detections(dets, {g1});
    CHECK(r.tp == 1);
    CHECK(r.fp == 0);
    CHECK(r.fn == 0);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(1.0));
    CHECK(r.f_measure == doctest::Approx(1.0));
  }

  SUBCASE("one detection for two ground truths") {
    std::vector<Detection> dets = {{g1, 0.9}};
    EvalResult r = match_detections(dets, {g1, g2});
    CHECK(r.tp == 1);
    CHECK(r.fn == 1);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(0.5));
    CHECK(r.f_measure == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  SUBCASE("detection on an ignored gt is neither tp nor fp") {
    TextPolygon ignored({{0, 0}, {20, 0}, {20, 10}, {0, 10}}, /*ignore=*/true);
    std::vector<Detection> dets = {{g1, 0.9}, {g2, 0.8}};
    EvalResult r = match_detections(dets, {ignored, g2});
    CHECK(r.ignored == 1);
    CHECK(r.tp == 1);  // only g2
    CHECK(r.fp == 0);  // det over the ignored region is discarded
    CHECK(r.fn == 0);
    CHECK(r.precision == doctest::Approx(1.0));
    CHECK(r.recall == doctest::Approx(1.0));
  }

  SUBCASE("empty inputs") {
    EvalResult r = match_detections({}, {});
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f_measure == 0.0);
  }
}

TEST_CASE("greedy matching equals the exhaustive optimum on star scenes") {
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<int> n_gt(1, 6);
  std::uniform_int_distribution<int> jit(-3, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int trial = 0; trial < 200; ++trial) {
    // Disjoint ground truths on a grid.
    const int ng = n_gt(rng);
    std::vector<TextPolygon> gts;
    for (int g = 0; g < ng; ++g) {
      const double x0 = 10 + 60.0 * g;
      gts.push_back(make_rect(x0, 10, x0 + 40, 34));
    }
    // Detections: jittered copies, occasional duplicates and strays.
    std::vector<Detection> dets;
    for (int g = 0; g < ng && static_cast<int>(dets.size()) < 6; ++g) {
      if (u(rng) < 0.8) {
        dets.push_back({gts[static_cast<std::size_t>(g)].translated(jit(rng), jit(rng)), 0.9});
      }
      if (u(rng) < 0.15) {
        dets.push_back({gts[static_cast<std::size_t>(g)].translated(jit(rng), jit(rng)), 0.5});
      }
    }
    if (u(rng) < 0.3 && dets.size() < 6) {
      dets.push_back({make_rect(500, 200, 540, 224), 0.3});  // stray fp
    }

    EvalResult r = match_detections(dets, gts, 0.5);

    std::vector<std::vector<double>> iou(dets.size(), std::vector<double>(gts.size(), 0.0));
    for (std::size_t d = 0; d < dets.size(); ++d) {
      for (std::size_t g = 0; g < gts.size(); ++g) {
        iou[d][g] = polygon_iou(dets[d].polygon, gts[g]);
      }
    }
    CHECK(r.tp == oracles::max_matching_tp(iou, 0.5));
    CHECK(r.tp <= static_cast<int>(std::min(dets.size(), gts.size())));
    CHECK(r.precision >= 0.0);
    CHECK(r.precision <= 1.0);
    CHECK(r.recall >= 0.0);
    CHECK(r.recall <= 1.0);
    CHECK(r.f_measure >= 0.0);
    CHECK(r.f_measure <= 1.0);
    for (const auto& m : r.matches) {
      CHECK(m.iou >= 0.5);
      CHECK(!gts[static_cast<std::size_t>(m.gt)].ignore());
    }
  }
}

TEST_CASE("bench_reconstruct validates input and reports both algorithms") {
  CHECK_THROWS_AS(bench_reconstruct(640, 10, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(bench_reconstruct(32, 10, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(bench_reconstruct(640, 0, 5, 1), std::invalid_argument);

  BenchReport r = bench_reconstruct(128, 2, 3, 42);
  CHECK(r.grid_size == 128);
  CHECK(r.instance_count == 2);
  CHECK(r.repeats == 3);
  CHECK(r.cm_detections == 2);
  CHECK(r.baseline_detections == 2);
  CHECK(r.cm_median_ms > 0.0);
  CHECK(r.baseline_median_ms > 0.0);
  CHECK(r.speed_ratio > 0.0);
}

TEST_CASE("bench scene detections are identical across repeats") {
  Scene scene = bench_scene(128, 2, 7);
  LabelConfig lc;
  lc.scale = 1;
  lc.n_centers = 1;
  LabelBundle labels = generate_labels(scene.instances, 128, 128, lc);
  ReconstructConfig cfg;
  cfg.scale = 1;
  auto a = reconstruct(to_soft(labels.cm), cfg);
  auto b = reconstruct(to_soft(labels.cm), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(polygon_iou(a[i].polygon, b[i].polygon) == doctest::Approx(1.0).epsilon(1e-12));
  }
}
