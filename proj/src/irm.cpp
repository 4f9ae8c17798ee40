#include "irm.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace crda {

void IrmConfig::validate() const {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw ConfigError("irm omega must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("irm gamma must be >= 0");
}

namespace {

// Mean of (sigmoid(z_i) - y_i) * z_i: the risk gradient w.r.t. the dummy
// scale at w = 1.
double dummy_scale_gradient(const std::vector<double>& logits, const std::vector<int>& labels) {
  if (logits.empty() || logits.size() != labels.size()) {
    throw NumericError("irm penalty: logits/labels size mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    sum += (sigmoid(logits[i]) - static_cast<double>(labels[i])) * logits[i];
  }
  return sum / static_cast<double>(logits.size());
}

std::vector<int> queue_labels(const SampleSet& samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const SyntheticSample& s : samples) labels.push_back(s.label);
  return labels;
}

}  // namespace

double irm_penalty(const std::vector<double>& logits, const std::vector<int>& labels) {
  const double d = dummy_scale_gradient(logits, labels);
  return d * d;
}

std::vector<double> irm_penalty_dlogit(const std::vector<double>& logits,
                                       const std::vector<int>& labels) {
  const double d = dummy_scale_gradient(logits, labels);
  const double n = static_cast<double>(logits.size());
  std::vector<double> dlogit(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    const double s = sigmoid(logits[i]);
    const double ds = s * (1.0 - s);
    dlogit[i] = 2.0 * d * (ds * logits[i] + s - static_cast<double>(labels[i])) / n;
  }
  return dlogit;
}

BiasLossReport bias_loss(const Detector& det, const EnvironmentQueues& queues,
                         const std::array<double, kNumEnvironments>& env_weights,
                         const IrmConfig& cfg) {
  BiasLossReport report;
  report.weights = env_weights;
  report.omega = cfg.omega;
  bool any = false;
  for (int env = 0; env < kNumEnvironments; ++env) {
    if (queues.empty(env)) continue;
    any = true;
    const SampleSet samples = queues.snapshot(env);
    const BatchForward fwd = batch_forward(det, samples);
    const std::vector<int> labels = queue_labels(samples);
    report.risk[env] = ce_loss(fwd.probs, labels);
    report.penalty[env] = irm_penalty(fwd.logits, labels);
    if (cfg.weighted_penalty) {
      report.value += env_weights[env] * (report.risk[env] + cfg.omega * report.penalty[env]);
    } else {
      report.value += env_weights[env] * report.risk[env] + cfg.omega * report.penalty[env];
    }
  }
  if (!any) {
    std::fprintf(stderr, "warning: bias loss over empty environment queues, returning 0\n");
  }
  return report;
}

void bias_loss_backward(const Detector& det, const EnvironmentQueues& queues,
                        const std::array<double, kNumEnvironments>& env_weights,
                        const IrmConfig& cfg, std::vector<double>& grad) {
  for (int env = 0; env < kNumEnvironments; ++env) {
    if (queues.empty(env)) continue;
    const SampleSet samples = queues.snapshot(env);
    const BatchForward fwd = batch_forward(det, samples);
    const std::vector<int> labels = queue_labels(samples);
    const double n = static_cast<double>(samples.size());
    const std::vector<double> dpen = irm_penalty_dlogit(fwd.logits, labels);

    const double risk_scale = env_weights[env];
    const double pen_scale = cfg.weighted_penalty ? env_weights[env] * cfg.omega : cfg.omega;
    std::vector<double> dlogit(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      const double dce = (fwd.probs[i] - static_cast<double>(labels[i])) / n;
      dlogit[i] = risk_scale * dce + pen_scale * dpen[i];
    }
    backward_from_dlogit(det, fwd, dlogit, grad);
  }
}

double total_loss(double ce, double bias, double gamma) { return ce + gamma * bias; }

}  // namespace crda
