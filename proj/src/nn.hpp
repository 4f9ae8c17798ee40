#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rng.hpp"

namespace crda {

// Two-layer perceptron over a flat parameter vector, layout
// [w1 (hidden x in), b1 (hidden), w2 (out x hidden), b2 (out)].
// Weight rows are contiguous: w1[j*in + i] connects input i to hidden j.
struct Mlp2Dims {
  int in = 0;
  int hidden = 0;
  int out = 0;
  bool relu_out = false;

  size_t w1_off() const { return 0; }
  size_t b1_off() const { return static_cast<size_t>(hidden) * in; }
  size_t w2_off() const { return b1_off() + hidden; }
  size_t b2_off() const { return w2_off() + static_cast<size_t>(out) * hidden; }
  size_t param_count() const { return b2_off() + out; }
};

// Forward intermediates needed for the backward pass.
struct Mlp2Cache {
  std::vector<double> input;
  std::vector<double> h_pre;   // hidden pre-activation
  std::vector<double> h_post;  // relu(h_pre)
  std::vector<double> y_pre;   // output pre-activation
  std::vector<double> y;       // output (== y_pre unless relu_out)
};

std::vector<double> mlp2_init(const Mlp2Dims& dims, Rng& rng);

void mlp2_forward(const Mlp2Dims& dims, const std::vector<double>& params,
                  const double* input, Mlp2Cache& cache);

// Accumulates dL/dparams into grad (same layout as params) given dL/dy.
// If dinput is non-null, also writes dL/dinput (length dims.in).
void mlp2_backward(const Mlp2Dims& dims, const std::vector<double>& params,
                   const Mlp2Cache& cache, const double* dy,
                   std::vector<double>& grad, double* dinput = nullptr);

// Adam with decoupled weight decay (update = lr * (mhat/(sqrt(vhat)+eps) + wd*p)).
struct AdamState {
  double lr = 1e-4;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
};

AdamState adam_init(size_t param_count, double lr, double weight_decay);
void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

// Scales grads in place so their L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_grad_norm(std::vector<double>& grads, double max_norm);

}  // namespace crda
