#pragma once

#include <functional>
#include <vector>

#include "nn.hpp"
#include "synthtask.hpp"

namespace crda {

// Detector f_theta = g_beta (affine head, 1 logit) over f_alpha (relu MLP
// backbone). Class 1 = fake; probability of fake = sigmoid(logit).
// Parameters live in one flat vector: [backbone | head_w (latent) | head_b].
struct Detector {
  int input_dim = 23;
  int hidden = 64;
  int latent = 32;
  std::vector<double> params;

  Mlp2Dims backbone_dims() const {
    return Mlp2Dims{input_dim, hidden, latent, /*relu_out=*/true};
  }
  size_t head_off() const { return backbone_dims().param_count(); }
  size_t param_count() const { return head_off() + latent + 1; }
};

Detector detector_init(int input_dim, int hidden, int latent, Rng& rng);

double sigmoid(double x);

// Backbone latent for one input vector.
std::vector<double> forward_latent(const Detector& det, const std::vector<double>& x);

// Head over a latent: (logit, probability of fake).
struct Classification {
  double logit = 0.0;
  double prob_fake = 0.5;
};
Classification classify(const Detector& det, const std::vector<double>& latent);

Classification classify_input(const Detector& det, const std::vector<double>& x);

// Forward pass over a batch keeping the caches needed for backprop.
struct BatchForward {
  std::vector<Mlp2Cache> caches;
  std::vector<double> logits;
  std::vector<double> probs;
};
BatchForward batch_forward(const Detector& det, const SampleSet& batch);

// Mean binary cross-entropy; probabilities clamped to [1e-12, 1-1e-12]
// inside the logs.
double ce_loss(const std::vector<double>& probs, const std::vector<int>& labels);

double ce_loss_batch(const Detector& det, const SampleSet& batch);

// Accumulates dLoss/dparams given per-sample dLoss/dlogit. This is the one
// backprop entry point; CE, IRM risk and IRM penalty all reduce to a choice
// of dlogit. Throws NumericError naming the parameter block if a non-finite
// value appears.
void backward_from_dlogit(const Detector& det, const BatchForward& fwd,
                          const std::vector<double>& dlogit,
                          std::vector<double>& grad);

// Gradient of mean CE over the batch with respect to every parameter.
std::vector<double> ce_backward(const Detector& det, const SampleSet& batch);

// Central-difference check of `analytic` against `loss` evaluated at det's
// current parameters. Returns the max relative error with a max(1, |g|)
// denominator. Step 1e-5.
double gradient_check(Detector& det,
                      const std::function<double(const Detector&)>& loss,
                      const std::vector<double>& analytic, double step = 1e-5);

}  // namespace crda
