#pragma once

#include <array>
#include <vector>

#include "cmtext/labels.hpp"
#include "cmtext/raster.hpp"

namespace cmtext {

/// Dense predictions for one image plus per-center regression outputs.
/// Regression vectors are aligned with LabelBundle::supervised_centers().
struct Prediction {
  SoftGrid cm;
  SoftGrid gap;
  std::vector<double> pmd;
  std::vector<std::array<double, 8>> rd;
};

struct LossWeights {
  double cm = 0.25;
  double gap = 0.25;
  double pmd = 0.25;
  double rd = 0.25;
};

struct LossGradients {
  SoftGrid cm;
  SoftGrid gap;
  std::vector<double> pmd;
  std::vector<std::array<double, 8>> rd;
};

struct LossReport {
  double l_cm = 0.0;
  double l_gap = 0.0;
  double l_pmd = 0.0;
  double l_rd = 0.0;
  double total = 0.0;
  LossGradients gradients;
};

struct DiceResult {
  double value = 0.0;
  SoftGrid gradient;
};

/// 1 - (2*sum(p*g) + 1) / (sum(p) + sum(g) + 1), with the exact
/// analytic derivative w.r.t. every prediction cell.
DiceResult dice_loss(const SoftGrid& pred, const BinaryGrid& gt);

/// Keeps predictions where the label is 1, zeroes the rest.
SoftGrid gap_valid(const SoftGrid& pred, const BinaryGrid& gt);

struct RatioResult {
  double value = 0.0;
  double derivative = 0.0;  // w.r.t. the prediction
};

/// log(max(p,g)/min(p,g)); scale invariant, symmetric, 0 iff equal.
/// Inputs are clamped to >= 1e-6; a non-positive ground truth is a
/// label bug and throws NonPositiveInput.
RatioResult ratio_loss(double pred, double gt);

/// Combined objective over CM dice, masked GAP dice, mean PMD ratio
/// loss and mean 8-direction RD ratio loss, with full chain-rule
/// gradients for every prediction.
LossReport total_loss(const Prediction& pred, const LabelBundle& labels,
                      const LossWeights& weights = {});

}  // namespace cmtext
