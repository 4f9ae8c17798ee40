#pragma once

#include <array>
#include <vector>

#include "detector.hpp"
#include "environments.hpp"
#include "synthtask.hpp"

namespace crda {

struct IrmConfig {
  double omega = 1.0;   // weight of the gradient penalty inside the bias loss
  double gamma = 0.5;   // weight of the bias loss in the detector objective
  // Both risk and penalty sit inside the w_m-weighted sum by default; the
  // alternative reading keeps the penalty term unweighted:
  //   true:  sum_m w_m * (risk_m + omega * penalty_m)
  //   false: sum_m w_m * risk_m  +  omega * sum_m penalty_m
  bool weighted_penalty = true;

  void validate() const;
};

// Squared gradient, at w = 1, of the mean binary cross-entropy of the dummy
// classifier sigmoid(w * logit) with respect to the scalar w:
//   ( mean_i (sigmoid(z_i) - y_i) * z_i )^2
double irm_penalty(const std::vector<double>& logits, const std::vector<int>& labels);

// d(penalty)/d(logit_i) for backprop through the detector:
//   2 * D * (sigmoid'(z_i) * z_i + sigmoid(z_i) - y_i) / N
// with D the mean inside the penalty definition.
std::vector<double> irm_penalty_dlogit(const std::vector<double>& logits,
                                       const std::vector<int>& labels);

struct BiasLossReport {
  std::array<double, kNumEnvironments> risk{};     // mean BCE per environment
  std::array<double, kNumEnvironments> penalty{};  // gradient penalty per environment
  std::array<double, kNumEnvironments> weights{};
  double omega = 1.0;
  double value = 0.0;
};

// Invariance objective over the environment queues. Empty environments
// contribute nothing; if every queue is empty the loss is 0 and a warning is
// emitted on stderr.
BiasLossReport bias_loss(const Detector& det, const EnvironmentQueues& queues,
                         const std::array<double, kNumEnvironments>& env_weights,
                         const IrmConfig& cfg);

// Gradient of bias_loss with respect to the detector parameters, holding the
// environment weights fixed. Accumulates into `grad`.
void bias_loss_backward(const Detector& det, const EnvironmentQueues& queues,
                        const std::array<double, kNumEnvironments>& env_weights,
                        const IrmConfig& cfg, std::vector<double>& grad);

// L_total = L_CE + gamma * L_bias.
double total_loss(double ce, double bias, double gamma);

}  // namespace crda
