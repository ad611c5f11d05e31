#include "cmtext/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace cmtext {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ParamState ParamState::init(const LabelBundle& labels, std::uint64_t seed) {
  ParamState s;
  s.height = labels.cm.height;
  s.width = labels.cm.width;
  const std::size_t n_cells = labels.cm.cells.size();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  s.cm_logits.resize(n_cells);
  s.gap_logits.resize(n_cells);
  for (auto& z : s.cm_logits) z = u(rng);
  for (auto& z : s.gap_logits) z = u(rng);

  const auto centers = labels.supervised_centers();
  double sum = 0.0;
  std::size_t count = 0;
  for (const CenterSample* c : centers) {
    sum += c->pmd;
    for (double r : c->ray_distances) sum += r;
    count += 9;
  }
  const double mean_log = count > 0 ? std::log(std::max(sum / count, 1e-6)) : 0.0;
  s.log_pmd.assign(centers.size(), mean_log);
  s.log_rd.assign(centers.size(), {mean_log, mean_log, mean_log, mean_log,
                                   mean_log, mean_log, mean_log, mean_log});
  return s;
}

Prediction ParamState::to_prediction() const {
  Prediction p;
  p.cm = SoftGrid(height, width);
  p.gap = SoftGrid(height, width);
  for (std::size_t i = 0; i < cm_logits.size(); ++i) p.cm.cells[i] = sigmoid(cm_logits[i]);
  for (std::size_t i = 0; i < gap_logits.size(); ++i) p.gap.cells[i] = sigmoid(gap_logits[i]);
  p.pmd.resize(log_pmd.size());
  for (std::size_t i = 0; i < log_pmd.size(); ++i) p.pmd[i] = std::exp(log_pmd[i]);
  p.rd.resize(log_rd.size());
  for (std::size_t i = 0; i < log_rd.size(); ++i) {
    for (int k = 0; k < 8; ++k) p.rd[i][k] = std::exp(log_rd[i][k]);
  }
  return p;
}

FitReport fit_direct(const LabelBundle& labels, int steps, double lr, std::uint64_t seed,
                     const LossWeights& weights) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (labels.cm.cells.empty()) throw std::invalid_argument("empty label bundle");

  const auto t0 = std::chrono::steady_clock::now();
  ParamState state = ParamState::init(labels, seed);
  // A dice gradient spreads over all cells (magnitude ~ 1/cell count)
  // while a ratio-loss derivative is per scalar, so grid steps are
  // scaled by the cell count to let one lr drive both groups.
  const double grid_scale = static_cast<double>(labels.cm.cells.size());

  FitReport report;
  report.trace.reserve(static_cast<std::size_t>(steps) + 1);

  Prediction pred = state.to_prediction();
  for (int step = 0; step < steps; ++step) {
    LossReport loss = total_loss(pred, labels, weights);
    if (!std::isfinite(loss.total)) throw Diverged("loss became non-finite");
    report.trace.push_back({loss.l_cm, loss.l_gap, loss.l_pmd, loss.l_rd, loss.total});

    for (std::size_t i = 0; i < state.cm_logits.size(); ++i) {
      const double p = pred.cm.cells[i];
      state.cm_logits[i] -= lr * grid_scale * loss.gradients.cm.cells[i] * p * (1.0 - p);
      const double q = pred.gap.cells[i];
      state.gap_logits[i] -= lr * grid_scale * loss.gradients.gap.cells[i] * q * (1.0 - q);
    }
    for (std::size_t i = 0; i < state.log_pmd.size(); ++i) {
      state.log_pmd[i] -= lr * loss.gradients.pmd[i] * pred.pmd[i];
      for (int k = 0; k < 8; ++k) {
        state.log_rd[i][k] -= lr * loss.gradients.rd[i][k] * pred.rd[i][k];
      }
    }
    pred = state.to_prediction();
  }

  report.final_report = total_loss(pred, labels, weights);
  if (!std::isfinite(report.final_report.total)) throw Diverged("loss became non-finite");
  report.trace.push_back({report.final_report.l_cm, report.final_report.l_gap,
                          report.final_report.l_pmd, report.final_report.l_rd,
                          report.final_report.total});
  report.final_prediction = std::move(pred);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

double grad_check(const LabelBundle& labels, const ParamState& state, double h,
                  const LossWeights& weights) {
  if (h < 1e-6 || h > 1e-3) throw std::invalid_argument("step must be in [1e-6, 1e-3]");

  const auto centers = labels.supervised_centers();
  const std::size_t n_cells = state.cm_logits.size();
  const std::size_t n_centers = state.log_pmd.size();
  const std::size_t total = 2 * n_cells + 9 * n_centers;

  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> chosen;
  const std::size_t budget = std::min<std::size_t>(64, total);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  while (chosen.size() < budget) {
    const std::size_t c = pick(rng);
    if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
  }

  auto eval_total = [&](const ParamState& s) {
    return total_loss(s.to_prediction(), labels, weights).total;
  };
  const LossReport base = total_loss(state.to_prediction(), labels, weights);
  const Prediction base_pred = state.to_prediction();

  double max_rel = 0.0;
  for (std::size_t c : chosen) {
    double analytic = 0.0;
    bool kink = false;
    ParamState plus = state, minus = state;
    if (c < n_cells) {
      const double p = base_pred.cm.cells[c];
      analytic = base.gradients.cm.cells[c] * p * (1.0 - p);
      plus.cm_logits[c] += h;
      minus.cm_logits[c] -= h;
    } else if (c < 2 * n_cells) {
      const std::size_t i = c - n_cells;
      const double p = base_pred.gap.cells[i];
      analytic = base.gradients.gap.cells[i] * p * (1.0 - p);
      plus.gap_logits[i] += h;
      minus.gap_logits[i] -= h;
    } else if (c < 2 * n_cells + n_centers) {
      const std::size_t i = c - 2 * n_cells;
      analytic = base.gradients.pmd[i] * base_pred.pmd[i];
      kink = std::abs(base_pred.pmd[i] - centers[i]->pmd) < 1e-3;
      plus.log_pmd[i] += h;
      minus.log_pmd[i] -= h;
    } else {
      const std::size_t off = c - 2 * n_cells - n_centers;
      const std::size_t i = off / 8;
      const int k = static_cast<int>(off % 8);
      analytic = base.gradients.rd[i][static_cast<std::size_t>(k)] *
                 base_pred.rd[i][static_cast<std::size_t>(k)];
      kink = std::abs(base_pred.rd[i][static_cast<std::size_t>(k)] -
                      centers[i]->ray_distances[static_cast<std::size_t>(k)]) < 1e-3;
      plus.log_rd[i][static_cast<std::size_t>(k)] += h;
      minus.log_rd[i][static_cast<std::size_t>(k)] -= h;
    }
    if (kink) continue;
    const double numeric = (eval_total(plus) - eval_total(minus)) / (2.0 * h);
    const double denom = std::max({1e-8, std::abs(analytic), std::abs(numeric)});
    max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
  }
  return max_rel;
}

}  // namespace cmtext
