#include "cmtext/losses.hpp"

#include <algorithm>
#include <cmath>

namespace cmtext {

namespace {

constexpr double kDistanceFloor = 1e-6;

}  // namespace

DiceResult dice_loss(const SoftGrid& pred, const BinaryGrid& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw DimensionMismatch("dice_loss prediction/label shapes differ");
  }
  double inter = 0.0, sum_p = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    const double p = pred.cells[i];
    sum_p += p;
    if (gt.cells[i]) {
      inter += p;
      sum_g += 1.0;
    }
  }
  const double num = 2.0 * inter + 1.0;
  const double den = sum_p + sum_g + 1.0;

  DiceResult res;
  res.value = 1.0 - num / den;
  res.gradient = SoftGrid(pred.height, pred.width);
  const double den2 = den * den;
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    const double g = gt.cells[i] ? 1.0 : 0.0;
    res.gradient.cells[i] = num / den2 - 2.0 * g / den;
  }
  return res;
}

SoftGrid gap_valid(const SoftGrid& pred, const BinaryGrid& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw DimensionMismatch("gap_valid prediction/label shapes differ");
  }
  SoftGrid out(pred.height, pred.width);
  for (std::size_t i = 0; i < pred.cells.size(); ++i) {
    out.cells[i] = gt.cells[i] ? pred.cells[i] : 0.0;
  }
  return out;
}

RatioResult ratio_loss(double pred, double gt) {
  if (gt <= 0.0) throw NonPositiveInput("ratio_loss ground truth must be positive");
  const double p = std::max(pred, kDistanceFloor);
  const double g = std::max(gt, kDistanceFloor);
  RatioResult res;
  res.value = std::log(std::max(p, g) / std::min(p, g));
  if (pred < kDistanceFloor) {
    res.derivative = 0.0;  // clamp absorbs the gradient
  } else if (p > g) {
    res.derivative = 1.0 / p;
  } else if (p < g) {
    res.derivative = -1.0 / p;
  } else {
    res.derivative = 0.0;  // subderivative at the kink
  }
  return res;
}

LossReport total_loss(const Prediction& pred, const LabelBundle& labels,
                      const LossWeights& weights) {
  const auto centers = labels.supervised_centers();
  if (pred.pmd.size() != centers.size() || pred.rd.size() != centers.size()) {
    throw DimensionMismatch("prediction has wrong number of center sites");
  }

  LossReport report;

  DiceResult cm = dice_loss(pred.cm, labels.cm);
  report.l_cm = cm.value;

  // Only the valid region (label = 1) of the GAP prediction trains; the
  // masked cells carry no gradient.
  DiceResult gap = dice_loss(gap_valid(pred.gap, labels.gap), labels.gap);
  report.l_gap = gap.value;

  report.gradients.cm = std::move(cm.gradient);
  report.gradients.gap = std::move(gap.gradient);
  for (std::size_t i = 0; i < report.gradients.cm.cells.size(); ++i) {
    report.gradients.cm.cells[i] *= weights.cm;
    report.gradients.gap.cells[i] =
        labels.gap.cells[i] ? report.gradients.gap.cells[i] * weights.gap : 0.0;
  }

  report.gradients.pmd.assign(centers.size(), 0.0);
  report.gradients.rd.assign(centers.size(), {});
  if (!centers.empty()) {
    const double inv_n = 1.0 / static_cast<double>(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
      RatioResult r = ratio_loss(pred.pmd[i], centers[i]->pmd);
      report.l_pmd += r.value * inv_n;
      report.gradients.pmd[i] = weights.pmd * inv_n * r.derivative;
      for (int k = 0; k < 8; ++k) {
        RatioResult rk = ratio_loss(pred.rd[i][k], centers[i]->ray_distances[k]);
        report.l_rd += rk.value * inv_n / 8.0;
        report.gradients.rd[i][k] = weights.rd * inv_n / 8.0 * rk.derivative;
      }
    }
  }

  report.total = weights.cm * report.l_cm + weights.gap * report.l_gap +
                 weights.pmd * report.l_pmd + weights.rd * report.l_rd;
  return report;
}

}  // namespace cmtext
