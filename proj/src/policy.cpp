#include "policy.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace crda {

Policy policy_init(int state_dim, int hidden, Rng& rng) {
  if (state_dim < 1 || hidden < 1) {
    throw ConfigError("policy dimensions must be positive");
  }
  Policy p;
  p.state_dim = state_dim;
  p.hidden = hidden;
  p.params = mlp2_init(p.dims(), rng);
  return p;
}

ActionDistribution softmax_distribution(const std::vector<double>& logits) {
  if (logits.empty()) throw NumericError("softmax over empty logits");
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("non-finite policy logit");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  ActionDistribution dist;
  dist.probs.resize(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    dist.probs[i] = std::exp(logits[i] - m);
    z += dist.probs[i];
  }
  for (double& p : dist.probs) p /= z;
  return dist;
}

ActionDistribution policy_forward(const Policy& policy, const std::vector<double>& state) {
  Mlp2Cache cache;
  return policy_forward_cached(policy, state, cache);
}

ActionDistribution policy_forward_cached(const Policy& policy,
                                         const std::vector<double>& state,
                                         Mlp2Cache& cache) {
  if (static_cast<int>(state.size()) != policy.state_dim) {
    throw NumericError("policy state dimension mismatch");
  }
  mlp2_forward(policy.dims(), policy.params, state.data(), cache);
  return softmax_distribution(cache.y);
}

SampledAction sample_action(const ActionDistribution& dist, Rng& rng) {
  SampledAction out;
  out.action = static_cast<int>(rng.categorical(dist.probs));
  out.logprob = std::log(dist.probs[out.action]);
  return out;
}

double action_entropy(const ActionDistribution& dist) {
  double h = 0.0;
  for (double p : dist.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double batch_entropy(const std::vector<ActionDistribution>& dists) {
  double total = 0.0;
  for (const ActionDistribution& d : dists) total += action_entropy(d);
  return total;
}

double kl_divergence(const ActionDistribution& p, const ActionDistribution& q) {
  if (p.probs.size() != q.probs.size()) {
    throw NumericError("KL divergence over mismatched supports");
  }
  double kl = 0.0;
  for (size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] <= 0.0) continue;
    if (q.probs[i] <= 0.0) throw NumericError("KL divergence with zero reference mass");
    kl += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  }
  return kl;
}

std::vector<double> initial_state(int state_dim, Rng& rng) {
  std::vector<double> s(static_cast<size_t>(state_dim));
  for (double& v : s) v = rng.normal();
  return s;
}

std::vector<double> normalize_state(std::vector<double> latent) {
  double sq = 0.0;
  for (double v : latent) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > 0.0) {
    for (double& v : latent) v /= norm;
  }
  return latent;
}

std::vector<double> update_state(const Detector& det, const SampleSet& batch) {
  if (batch.empty()) throw NumericError("state update over empty batch");
  std::vector<double> mean(static_cast<size_t>(det.latent), 0.0);
  for (const SyntheticSample& s : batch) {
    const std::vector<double> z = forward_latent(det, s.features);
    for (size_t i = 0; i < mean.size(); ++i) mean[i] += z[i];
  }
  for (double& v : mean) v /= static_cast<double>(batch.size());
  return normalize_state(std::move(mean));
}

ActionDistribution per_sample_distribution(const Policy& policy, const Detector& det,
                                           const SyntheticSample& sample) {
  return policy_forward(policy, normalize_state(forward_latent(det, sample.features)));
}

}  // namespace crda
