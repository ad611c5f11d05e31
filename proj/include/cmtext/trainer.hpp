#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmtext/labels.hpp"
#include "cmtext/losses.hpp"

namespace cmtext {

/// Free per-cell / per-center parameters standing in for the network
/// heads. Grids are driven through a sigmoid and distances through an
/// exp, so the derived Prediction always satisfies the loss module's
/// range preconditions.
struct ParamState {
  int height = 0;
  int width = 0;
  std::vector<double> cm_logits;
  std::vector<double> gap_logits;
  std::vector<double> log_pmd;
  std::vector<std::array<double, 8>> log_rd;

  static ParamState init(const LabelBundle& labels, std::uint64_t seed);
  Prediction to_prediction() const;
};

struct TraceEntry {
  double l_cm = 0.0;
  double l_gap = 0.0;
  double l_pmd = 0.0;
  double l_rd = 0.0;
  double total = 0.0;
};

struct FitReport {
  std::vector<TraceEntry> trace;  // steps + 1 entries
  LossReport final_report;
  Prediction final_prediction;
  double wall_ms = 0.0;
};

/// Plain gradient descent on the combined loss. Logits start at
/// uniform(-0.1, 0.1) from the seed; log-distances at the log of the
/// mean ground-truth distance. Deterministic given the seed; throws
/// Diverged if the loss goes non-finite.
FitReport fit_direct(const LabelBundle& labels, int steps, double lr, std::uint64_t seed,
                     const LossWeights& weights = {});

/// Central finite differences of the total loss against the analytic
/// gradient over a fixed random 64-parameter subset. Returns the max
/// relative error (denominators floored at 1e-8); ratio-loss kink
/// parameters (|pred - gt| < 1e-3) are excluded.
double grad_check(const LabelBundle& labels, const ParamState& state, double h,
                  const LossWeights& weights = {});

}  // namespace cmtext
