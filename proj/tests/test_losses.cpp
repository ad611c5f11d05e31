#include <cmath>
#include <random>

#include "cmtext/labels.hpp"
#include "cmtext/losses.hpp"
#include "cmtext/synth.hpp"
#include "doctest.h"

using namespace cmtext;

namespace {

SoftGrid random_soft(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.02, 0.98);
  SoftGrid g(h, w);
  for (auto& c : g.cells) c = u(rng);
  return g;
}

BinaryGrid random_binary(std::mt19937_64& rng, int h, int w) {
  std::uniform_int_distribution<int> coin(0, 1);
  BinaryGrid g(h, w);
  for (auto& c : g.cells) c = static_cast<std::uint8_t>(coin(rng));
  return g;
}

double dice_value_only(const SoftGrid& pred, const BinaryGrid& gt) {
  double inter = 0.0, sp = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    sp += pred.cells[i];
    if (gt.cells[i]) {
      sg += 1.0;
      inter += pred.cells[i];
    }
  }
  return 1.0 - (2.0 * inter + 1.0) / (sp + sg + 1.0);
}

}  // namespace

TEST_CASE("dice_loss values") {
  BinaryGrid gt(2, 2);
  gt.set(0, 0, 1);
  gt.set(1, 1, 1);
  CHECK(dice_loss(to_soft(gt), gt).value == doctest::Approx(0.0).epsilon(1e-12));

  SoftGrid ones(2, 2, 1.0);
  BinaryGrid zeros(2, 2);
  CHECK(dice_loss(ones, zeros).value == doctest::Approx(0.8).epsilon(1e-12));

  SoftGrid wrong(3, 3);
  CHECK_THROWS_AS(dice_loss(wrong, gt), DimensionMismatch);
}

TEST_CASE("dice_loss stays in [0,1] and vanishes only on equality") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    SoftGrid pred = random_soft(rng, 6, 7);
    BinaryGrid gt = random_binary(rng, 6, 7);
    const double v = dice_loss(pred, gt).value;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(dice_loss(to_soft(gt), gt).value == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("dice_loss gradient matches central finite differences") {
  std::mt19937_64 rng(7);
  const double h = 1e-4;
  for (int trial = 0; trial < 5; ++trial) {
    SoftGrid pred = random_soft(rng, 8, 8);
    BinaryGrid gt = random_binary(rng, 8, 8);
    DiceResult res = dice_loss(pred, gt);
    std::uniform_int_distribution<std::size_t> pick(0, pred.cells.size() - 1);
    for (int k = 0; k < 16; ++k) {
      const std::size_t i = pick(rng);
      SoftGrid plus = pred, minus = pred;
      plus.cells[i] += h;
      minus.cells[i] -= h;
      const double numeric = (dice_value_only(plus, gt) - dice_value_only(minus, gt)) / (2 * h);
      const double analytic = res.gradient.cells[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max({1e-8, std::abs(numeric), std::abs(analytic)});
      CHECK(rel <= 1e-5);
    }
  }
}

TEST_CASE("gap_valid masks where the label is zero") {
  SoftGrid pred(2, 2);
  pred.cells = {0.9, 0.8, 0.7, 0.6};
  BinaryGrid gt(2, 2);
  gt.cells = {1, 0, 0, 1};
  SoftGrid masked = gap_valid(pred, gt);
  CHECK(masked.cells[0] == doctest::Approx(0.9));
  CHECK(masked.cells[1] == doctest::Approx(0.0));
  CHECK(masked.cells[2] == doctest::Approx(0.0));
  CHECK(masked.cells[3] == doctest::Approx(0.6));

  BinaryGrid all_ones(2, 2);
  all_ones.cells.assign(4, 1);
  CHECK(gap_valid(pred, all_ones).cells == pred.cells);

  BinaryGrid all_zeros(2, 2);
  for (double c : gap_valid(pred, all_zeros).cells) CHECK(c == 0.0);

  SoftGrid wrong(3, 2);
  CHECK_THROWS_AS(gap_valid(wrong, gt), DimensionMismatch);
}

TEST_CASE("ratio_loss values and derivative") {
  CHECK(ratio_loss(20.0, 20.0).value == 0.0);
  CHECK(ratio_loss(40.0, 20.0).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ratio_loss(40.0, 20.0).derivative == doctest::Approx(1.0 / 40.0));
  CHECK(ratio_loss(10.0, 20.0).derivative == doctest::Approx(-1.0 / 10.0));
  CHECK(ratio_loss(20.0, 20.0).derivative == 0.0);
  CHECK_THROWS_AS(ratio_loss(10.0, 0.0), NonPositiveInput);
  CHECK_THROWS_AS(ratio_loss(10.0, -3.0), NonPositiveInput);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    const double p = dist(rng), g = dist(rng), c = dist(rng);
    const double v = ratio_loss(p, g).value;
    CHECK(v >= 0.0);
    CHECK(ratio_loss(g, p).value == v);                                      // symmetry
    CHECK(std::abs(ratio_loss(c * p, c * g).value - v) <= 1e-12);            // scale invariance
    if (std::abs(p - g) > 1e-6 * std::max(p, g)) CHECK(v > 0.0);             // 0 iff equal
  }
}

TEST_CASE("total_loss combines components exactly") {
  // One rectangle scene at image scale.
  std::vector<TextPolygon> instances = {make_rect(8, 8, 56, 40)};
  LabelConfig lc;
  lc.scale = 1;
  lc.n_centers = 3;
  LabelBundle labels = generate_labels(instances, 64, 64, lc);
  const auto centers = labels.supervised_centers();
  REQUIRE(centers.size() == 3);

  SUBCASE("perfect predictions give zero everywhere") {
    Prediction pred;
    pred.cm = to_soft(labels.cm);
    pred.gap = to_soft(labels.gap);
    for (const auto* c : centers) {
      pred.pmd.push_back(c->pmd);
      pred.rd.push_back(c->ray_distances);
    }
    LossReport report = total_loss(pred, labels);
    CHECK(report.l_cm == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.l_gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.l_pmd == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.l_rd == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.total == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("total is the exact weighted sum and scales linearly in lambda") {
    std::mt19937_64 rng(13);
    Prediction pred;
    pred.cm = random_soft(rng, 64, 64);
    pred.gap = random_soft(rng, 64, 64);
    std::uniform_real_distribution<double> d(5.0, 50.0);
    for (std::size_t i = 0; i < centers.size(); ++i) {
      pred.pmd.push_back(d(rng));
      pred.rd.push_back({d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng)});
    }
    LossWeights w;  // all 0.25
    LossReport r1 = total_loss(pred, labels, w);
    CHECK(r1.total ==
          0.25 * r1.l_cm + 0.25 * r1.l_gap + 0.25 * r1.l_pmd + 0.25 * r1.l_rd);

    LossWeights w2 = w;
    w2.pmd = 0.5;
    LossReport r2 = total_loss(pred, labels, w2);
    CHECK(r2.total - r1.total == doctest::Approx(0.25 * r1.l_pmd).epsilon(1e-12));
    for (std::size_t i = 0; i < centers.size(); ++i) {
      CHECK(r2.gradients.pmd[i] == doctest::Approx(2.0 * r1.gradients.pmd[i]).epsilon(1e-12));
    }

    // The gap gradient is masked wherever the label is 0.
    for (std::size_t i = 0; i < labels.gap.cells.size(); ++i) {
      if (!labels.gap.cells[i]) CHECK(r1.gradients.gap.cells[i] == 0.0);
    }
  }

  SUBCASE("component arithmetic of the weighted sum") {
    // (0.4, 0.2, ln 2, 0.1) with all weights 0.25.
    const double total = 0.25 * (0.4 + 0.2 + std::log(2.0) + 0.1);
    CHECK(total == doctest::Approx(0.348287).epsilon(1e-6));
  }

  SUBCASE("mismatched regression sites throw") {
    Prediction pred;
    pred.cm = to_soft(labels.cm);
    pred.gap = to_soft(labels.gap);
    pred.pmd = {1.0};  // wrong count
    pred.rd = {{1, 1, 1, 1, 1, 1, 1, 1}};
    CHECK_THROWS_AS(total_loss(pred, labels), DimensionMismatch);
  }
}
