#include "nn.hpp"

#include <cmath>
#include <stdexcept>

namespace crda {

std::vector<double> mlp2_init(const Mlp2Dims& dims, Rng& rng) {
  std::vector<double> params(dims.param_count());
  const double s1 = 1.0 / std::sqrt(static_cast<double>(dims.in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  size_t p = dims.w1_off();
  for (int j = 0; j < dims.hidden; ++j)
    for (int i = 0; i < dims.in; ++i) params[p++] = (2.0 * rng.uniform01() - 1.0) * s1;
  for (int j = 0; j < dims.hidden; ++j) params[p++] = (2.0 * rng.uniform01() - 1.0) * s1;
  for (int o = 0; o < dims.out; ++o)
    for (int j = 0; j < dims.hidden; ++j) params[p++] = (2.0 * rng.uniform01() - 1.0) * s2;
  for (int o = 0; o < dims.out; ++o) params[p++] = (2.0 * rng.uniform01() - 1.0) * s2;
  return params;
}

void mlp2_forward(const Mlp2Dims& dims, const std::vector<double>& params,
                  const double* input, Mlp2Cache& cache) {
  // Callers may append extra parameter blocks after this MLP's (the detector
  // keeps its head in the same flat vector), so only a shortfall is an error.
  if (params.size() < dims.param_count())
    throw std::invalid_argument("mlp2_forward: parameter vector too short");
  cache.input.assign(input, input + dims.in);
  cache.h_pre.resize(dims.hidden);
  cache.h_post.resize(dims.hidden);
  cache.y_pre.resize(dims.out);
  cache.y.resize(dims.out);

  const double* w1 = params.data() + dims.w1_off();
  const double* b1 = params.data() + dims.b1_off();
  const double* w2 = params.data() + dims.w2_off();
  const double* b2 = params.data() + dims.b2_off();

  for (int j = 0; j < dims.hidden; ++j) {
    double acc = b1[j];
    const double* row = w1 + static_cast<size_t>(j) * dims.in;
    for (int i = 0; i < dims.in; ++i) acc += row[i] * input[i];
    cache.h_pre[j] = acc;
    cache.h_post[j] = acc > 0.0 ? acc : 0.0;
  }
  for (int o = 0; o < dims.out; ++o) {
    double acc = b2[o];
    const double* row = w2 + static_cast<size_t>(o) * dims.hidden;
    for (int j = 0; j < dims.hidden; ++j) acc += row[j] * cache.h_post[j];
    cache.y_pre[o] = acc;
    cache.y[o] = dims.relu_out ? (acc > 0.0 ? acc : 0.0) : acc;
  }
}

void mlp2_backward(const Mlp2Dims& dims, const std::vector<double>& params,
                   const Mlp2Cache& cache, const double* dy,
                   std::vector<double>& grad, double* dinput) {
  if (grad.size() != dims.param_count())
    throw std::invalid_argument("mlp2_backward: gradient vector size mismatch");
  const double* w1 = params.data() + dims.w1_off();
  const double* w2 = params.data() + dims.w2_off();
  double* gw1 = grad.data() + dims.w1_off();
  double* gb1 = grad.data() + dims.b1_off();
  double* gw2 = grad.data() + dims.w2_off();
  double* gb2 = grad.data() + dims.b2_off();

  std::vector<double> dy_pre(dims.out);
  for (int o = 0; o < dims.out; ++o)
    dy_pre[o] = dims.relu_out && cache.y_pre[o] <= 0.0 ? 0.0 : dy[o];

  std::vector<double> dh(dims.hidden, 0.0);
  for (int o = 0; o < dims.out; ++o) {
    const double g = dy_pre[o];
    gb2[o] += g;
    double* grow = gw2 + static_cast<size_t>(o) * dims.hidden;
    const double* wrow = w2 + static_cast<size_t>(o) * dims.hidden;
    for (int j = 0; j < dims.hidden; ++j) {
      grow[j] += g * cache.h_post[j];
      dh[j] += g * wrow[j];
    }
  }
  for (int j = 0; j < dims.hidden; ++j)
    if (cache.h_pre[j] <= 0.0) dh[j] = 0.0;

  if (dinput)
    for (int i = 0; i < dims.in; ++i) dinput[i] = 0.0;
  for (int j = 0; j < dims.hidden; ++j) {
    const double g = dh[j];
    if (g == 0.0) continue;
    gb1[j] += g;
    double* grow = gw1 + static_cast<size_t>(j) * dims.in;
    const double* wrow = w1 + static_cast<size_t>(j) * dims.in;
    for (int i = 0; i < dims.in; ++i) {
      grow[i] += g * cache.input[i];
      if (dinput) dinput[i] += g * wrow[i];
    }
  }
}

AdamState adam_init(size_t param_count, double lr, double weight_decay) {
  AdamState s;
  s.lr = lr;
  s.weight_decay = weight_decay;
  s.m.assign(param_count, 0.0);
  s.v.assign(param_count, 0.0);
  return s;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.lr * (mhat / (std::sqrt(vhat) + state.eps) +
                             state.weight_decay * params[i]);
  }
}

double clip_grad_norm(std::vector<double>& grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace crda
