#pragma once

#include <array>
#include <vector>

#include "detector.hpp"
#include "policy.hpp"
#include "schedules.hpp"
#include "synthtask.hpp"

namespace crda {

// Area under the ROC curve via the rank-sum (Mann-Whitney) statistic, with
// ties counted as half. `scores` are larger-is-positive; labels are 0/1.
// Requires at least one sample of each class.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean prediction confidence: (1/N) * sum_i (1 - |p_i - y_i|), from
// probabilities computed before the detector update.
double training_stability(const std::vector<double>& probs_fake, const std::vector<int>& labels);

// AUC improvement over the previous epoch; the baseline starts at chance.
double delta_auc(double current_auc, double previous_auc);

// Minimax deception term: for each base real, mix the backbone latents of its
// seven augmented variants weighted by the action distribution, classify the
// mixture, and average the predicted real-class probability.
double adversarial_deception(const Detector& det, const ActionDistribution& dist,
                             const SampleSet& base_reals, const Region& region,
                             const TaskConfig& task);

// Piecewise-constant reward-weight course over normalized time t/tau.
struct RewardWeights {
  std::array<double, 4> lambda{0.6, 0.2, 0.1, 0.1};  // stability, delta-auc, adversarial, kl
};

struct RewardCourse {
  std::array<double, 4> early{0.6, 0.2, 0.1, 0.1};
  std::array<double, 4> mid{0.3, 0.4, 0.2, 0.1};
  std::array<double, 4> late{0.2, 0.3, 0.4, 0.1};
  double early_end = 0.3;   // phase boundary as a fraction of tau
  double late_start = 0.7;

  void validate() const;
};

RewardWeights lambda_schedule(const RewardCourse& course, double t, double total_epochs);

struct RewardBreakdown {
  double stability = 0.0;
  double delta_auc = 0.0;
  double adversarial = 0.0;
  double kl = 0.0;  // enters negatively
  RewardWeights weights;
  double total = 0.0;
};

RewardBreakdown total_reward(double stability, double delta_auc, double adversarial,
                             double kl, const RewardWeights& weights);

}  // namespace crda
