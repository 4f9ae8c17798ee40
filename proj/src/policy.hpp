#pragma once

#include <vector>

#include "detector.hpp"
#include "nn.hpp"
#include "rng.hpp"
#include "synthtask.hpp"

namespace crda {

// PolicyNet: latent state -> softmax distribution over the 7 augmentation
// actions, via a 2-layer MLP.
struct Policy {
  int state_dim = 32;
  int hidden = 64;
  std::vector<double> params;

  Mlp2Dims dims() const { return Mlp2Dims{state_dim, hidden, kNumOps, false}; }
};

Policy policy_init(int state_dim, int hidden, Rng& rng);

struct ActionDistribution {
  std::vector<double> probs;  // K entries, strictly positive, sum 1
};

// Softmax over logits with max-subtraction for numerical stability.
ActionDistribution softmax_distribution(const std::vector<double>& logits);

ActionDistribution policy_forward(const Policy& policy, const std::vector<double>& state);

// Forward keeping the cache for backprop (PPO update path).
ActionDistribution policy_forward_cached(const Policy& policy,
                                         const std::vector<double>& state,
                                         Mlp2Cache& cache);

struct SampledAction {
  int action = 0;
  double logprob = 0.0;
};
SampledAction sample_action(const ActionDistribution& dist, Rng& rng);

// Shannon entropy in nats; 0*ln 0 treated as 0.
double action_entropy(const ActionDistribution& dist);

// Batch entropy: sum of per-sample entropies.
double batch_entropy(const std::vector<ActionDistribution>& dists);

// KL(p || q); q must be strictly positive.
double kl_divergence(const ActionDistribution& p, const ActionDistribution& q);

// Fresh episode state: k-dimensional standard normal.
std::vector<double> initial_state(int state_dim, Rng& rng);

// L2-normalizes a latent into a policy state; the zero vector maps to itself.
std::vector<double> normalize_state(std::vector<double> latent);

// State transition: L2-normalized mean of the detector backbone latents over
// the (augmented) batch.
std::vector<double> update_state(const Detector& det, const SampleSet& batch);

// Per-sample action distribution: policy applied to the sample's own
// normalized latent. Used for the entropy-based environment partition.
ActionDistribution per_sample_distribution(const Policy& policy, const Detector& det,
                                           const SyntheticSample& sample);

}  // namespace crda
