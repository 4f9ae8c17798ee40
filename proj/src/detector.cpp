#include "detector.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace crda {
namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) {
  if (p < kProbFloor) return kProbFloor;
  if (p > 1.0 - kProbFloor) return 1.0 - kProbFloor;
  return p;
}

void check_finite(const std::vector<double>& grad, const Detector& det) {
  for (size_t i = 0; i < grad.size(); ++i) {
    if (std::isfinite(grad[i])) continue;
    const char* block = i < det.head_off() ? "backbone" : "head";
    char msg[96];
    std::snprintf(msg, sizeof(msg), "non-finite gradient in %s at index %zu", block, i);
    throw NumericError(msg);
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Detector detector_init(int input_dim, int hidden, int latent, Rng& rng) {
  Detector det;
  det.input_dim = input_dim;
  det.hidden = hidden;
  det.latent = latent;
  det.params = mlp2_init(det.backbone_dims(), rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(latent));
  for (int i = 0; i < latent + 1; ++i)
    det.params.push_back((2.0 * rng.uniform01() - 1.0) * s);
  return det;
}

std::vector<double> forward_latent(const Detector& det, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != det.input_dim)
    throw ConfigError("forward_latent: input dimension mismatch");
  Mlp2Cache cache;
  mlp2_forward(det.backbone_dims(), det.params, x.data(), cache);
  return cache.y;
}

Classification classify(const Detector& det, const std::vector<double>& latent) {
  if (static_cast<int>(latent.size()) != det.latent)
    throw ConfigError("classify: latent dimension mismatch");
  const double* head = det.params.data() + det.head_off();
  double logit = head[det.latent];  // bias
  for (int i = 0; i < det.latent; ++i) logit += head[i] * latent[i];
  return Classification{logit, sigmoid(logit)};
}

Classification classify_input(const Detector& det, const std::vector<double>& x) {
  return classify(det, forward_latent(det, x));
}

BatchForward batch_forward(const Detector& det, const SampleSet& batch) {
  if (batch.empty()) throw ConfigError("batch_forward: empty batch");
  BatchForward fwd;
  fwd.caches.resize(batch.size());
  fwd.logits.resize(batch.size());
  fwd.probs.resize(batch.size());
  const Mlp2Dims dims = det.backbone_dims();
  const double* head = det.params.data() + det.head_off();
  for (size_t i = 0; i < batch.size(); ++i) {
    mlp2_forward(dims, det.params, batch[i].features.data(), fwd.caches[i]);
    double logit = head[det.latent];
    for (int j = 0; j < det.latent; ++j) logit += head[j] * fwd.caches[i].y[j];
    fwd.logits[i] = logit;
    fwd.probs[i] = sigmoid(logit);
  }
  return fwd;
}

double ce_loss(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw ConfigError("ce_loss: empty batch or size mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    sum += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(probs.size());
}

double ce_loss_batch(const Detector& det, const SampleSet& batch) {
  const BatchForward fwd = batch_forward(det, batch);
  std::vector<int> labels(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].label;
  return ce_loss(fwd.probs, labels);
}

void backward_from_dlogit(const Detector& det, const BatchForward& fwd,
                          const std::vector<double>& dlogit,
                          std::vector<double>& grad) {
  if (dlogit.size() != fwd.caches.size())
    throw ConfigError("backward_from_dlogit: dlogit size mismatch");
  if (grad.size() != det.param_count()) grad.assign(det.param_count(), 0.0);
  const Mlp2Dims dims = det.backbone_dims();
  const double* head_w = det.params.data() + det.head_off();
  double* ghead = grad.data() + det.head_off();

  // The head gradient is accumulated directly; the latent gradient is pushed
  // down through the backbone.
  std::vector<double> backbone_grad(dims.param_count(), 0.0);
  std::vector<double> dlatent(det.latent);
  for (size_t i = 0; i < fwd.caches.size(); ++i) {
    const double g = dlogit[i];
    if (g == 0.0) continue;
    for (int j = 0; j < det.latent; ++j) {
      ghead[j] += g * fwd.caches[i].y[j];
      dlatent[j] = g * head_w[j];
    }
    ghead[det.latent] += g;
    mlp2_backward(dims, det.params, fwd.caches[i], dlatent.data(), backbone_grad);
  }
  for (size_t i = 0; i < backbone_grad.size(); ++i) grad[i] += backbone_grad[i];
  check_finite(grad, det);
}

std::vector<double> ce_backward(const Detector& det, const SampleSet& batch) {
  const BatchForward fwd = batch_forward(det, batch);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> dlogit(batch.size());
  for (size_t i = 0; i < batch.size(); ++i)
    dlogit[i] = (fwd.probs[i] - static_cast<double>(batch[i].label)) * inv_n;
  std::vector<double> grad(det.param_count(), 0.0);
  backward_from_dlogit(det, fwd, dlogit, grad);
  return grad;
}

double gradient_check(Detector& det,
                      const std::function<double(const Detector&)>& loss,
                      const std::vector<double>& analytic, double step) {
  if (analytic.size() != det.param_count())
    throw ConfigError("gradient_check: gradient size mismatch");
  double worst = 0.0;
  for (size_t i = 0; i < det.params.size(); ++i) {
    const double saved = det.params[i];
    det.params[i] = saved + step;
    const double up = loss(det);
    det.params[i] = saved - step;
    const double down = loss(det);
    det.params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max(1.0, std::max(std::abs(numeric), std::abs(analytic[i])));
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace crda
