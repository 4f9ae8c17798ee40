#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

#include "detector.hpp"
#include "policy.hpp"
#include "synthtask.hpp"

namespace crda {

inline constexpr int kNumEnvironments = 4;  // dominant + three adversarial bands

// Assignment of batch indices to environments by policy entropy. The sample
// with the lowest entropy (ties to the lowest index) anchors the dominant
// environment; everything below a quarter of the batch maximum joins it. The
// remaining samples fall into bands of relative entropy: [0.75, 1] is the
// most uncertain adversarial environment, then [0.5, 0.75) and [0.25, 0.5).
struct Partition {
  std::array<std::vector<size_t>, kNumEnvironments> members;
};

Partition partition_by_entropy(const std::vector<double>& entropies);

// Bounded FIFO per environment; pushing past capacity evicts the oldest.
class EnvironmentQueues {
 public:
  explicit EnvironmentQueues(size_t capacity);

  void push(int env, const SyntheticSample& sample, double entropy);
  size_t size(int env) const;
  size_t capacity() const { return capacity_; }
  bool empty(int env) const { return queue(env).empty(); }

  // Samples currently held, oldest first.
  SampleSet snapshot(int env) const;
  // Mean policy entropy of the held samples; 0 for an empty queue.
  double mean_entropy(int env) const;

  struct Entry {
    SyntheticSample sample;
    double entropy = 0.0;
  };
  // Full contents, oldest first; used by checkpointing.
  std::vector<Entry> entries(int env) const;

  void clear();

 private:
  const std::deque<Entry>& queue(int env) const;
  std::deque<Entry>& queue(int env);

  size_t capacity_;
  std::array<std::deque<Entry>, kNumEnvironments> queues_;
};

// Softmax over negated mean entropies: calmer environments weigh more.
// Environments marked inactive get weight 0 and are excluded from the softmax.
std::array<double, kNumEnvironments> weights_from_entropies(
    const std::array<double, kNumEnvironments>& mean_entropies,
    const std::array<bool, kNumEnvironments>& active);

// Weights from mean entropies recomputed under the current policy and
// detector at call time, not the entropies cached when samples were queued.
std::array<double, kNumEnvironments> environment_weights(const EnvironmentQueues& queues,
                                                         const Policy& policy,
                                                         const Detector& detector);

}  // namespace crda
