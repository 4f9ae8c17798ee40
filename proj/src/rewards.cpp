#include "rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace crda {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw NumericError("auc: scores/labels size mismatch");
  const size_t n = scores.size();
  size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw NumericError("auc: labels must be 0 or 1");
    n_pos += static_cast<size_t>(y);
  }
  const size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw NumericError("auc: needs both classes");

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Sum of positive-class ranks, averaging ranks across tied scores.
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double training_stability(const std::vector<double>& probs_fake, const std::vector<int>& labels) {
  if (probs_fake.size() != labels.size() || probs_fake.empty()) {
    throw NumericError("stability: probs/labels size mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < probs_fake.size(); ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) throw NumericError("stability: labels must be 0 or 1");
    sum += 1.0 - std::abs(probs_fake[i] - static_cast<double>(y));
  }
  return sum / static_cast<double>(probs_fake.size());
}

double delta_auc(double current_auc, double previous_auc) {
  return current_auc - previous_auc;
}

double adversarial_deception(const Detector& det, const ActionDistribution& dist,
                             const SampleSet& base_reals, const Region& region,
                             const TaskConfig& task) {
  if (base_reals.empty()) throw NumericError("adversarial reward over empty base set");
  if (dist.probs.size() != static_cast<size_t>(kNumOps)) {
    throw NumericError("adversarial reward: action distribution has wrong arity");
  }
  const size_t latent = static_cast<size_t>(det.latent);
  std::vector<double> mixture(latent);
  double sum = 0.0;
  for (const SyntheticSample& real : base_reals) {
    std::fill(mixture.begin(), mixture.end(), 0.0);
    for (int op = 0; op < kNumOps; ++op) {
      const SyntheticSample fake = apply_augmentation(real, op, region, task);
      const std::vector<double> z = forward_latent(det, fake.features);
      const double w = dist.probs[static_cast<size_t>(op)];
      for (size_t d = 0; d < latent; ++d) mixture[d] += w * z[d];
    }
    const Classification c = classify(det, mixture);
    sum += 1.0 - c.prob_fake;  // probability the blended fake passes as real
  }
  return sum / static_cast<double>(base_reals.size());
}

void RewardCourse::validate() const {
  if (!(early_end > 0.0 && early_end < late_start && late_start < 1.0)) {
    throw ConfigError("reward course phases must satisfy 0 < early_end < late_start < 1");
  }
  for (const auto* lam : {&early, &mid, &late}) {
    for (double v : *lam) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError("reward weights must be finite and non-negative");
      }
    }
  }
}

RewardWeights lambda_schedule(const RewardCourse& course, double t, double total_epochs) {
  if (total_epochs <= 0.0) throw ConfigError("lambda schedule needs positive horizon");
  const double frac = t / total_epochs;
  RewardWeights w;
  if (frac < course.early_end) {
    w.lambda = course.early;
  } else if (frac < course.late_start) {
    w.lambda = course.mid;
  } else {
    w.lambda = course.late;
  }
  return w;
}

RewardBreakdown total_reward(double stability, double delta_auc, double adversarial,
                             double kl, const RewardWeights& weights) {
  const struct { const char* name; double value; } parts[] = {
      {"stability", stability}, {"delta_auc", delta_auc},
      {"adversarial", adversarial}, {"kl", kl}};
  for (const auto& p : parts) {
    if (!std::isfinite(p.value)) {
      throw NumericError(std::string("reward component not finite: ") + p.name);
    }
  }
  RewardBreakdown r;
  r.stability = stability;
  r.delta_auc = delta_auc;
  r.adversarial = adversarial;
  r.kl = kl;
  r.weights = weights;
  r.total = weights.lambda[0] * stability + weights.lambda[1] * delta_auc +
            weights.lambda[2] * adversarial - weights.lambda[3] * kl;
  return r;
}

}  // namespace crda
