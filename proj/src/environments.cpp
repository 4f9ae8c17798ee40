#include "environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace crda {

Partition partition_by_entropy(const std::vector<double>& entropies) {
  if (entropies.empty()) throw NumericError("partition over empty batch");
  for (double h : entropies) {
    if (!std::isfinite(h) || h < 0.0) throw NumericError("entropies must be finite and non-negative");
  }
  Partition part;
  const size_t anchor = static_cast<size_t>(
      std::min_element(entropies.begin(), entropies.end()) - entropies.begin());
  const double h_max = *std::max_element(entropies.begin(), entropies.end());
  if (h_max == 0.0) {
    // Degenerate batch: every sample is maximally confident.
    for (size_t i = 0; i < entropies.size(); ++i) part.members[0].push_back(i);
    return part;
  }
  for (size_t i = 0; i < entropies.size(); ++i) {
    const double rel = entropies[i] / h_max;
    if (i == anchor || rel < 0.25) {
      part.members[0].push_back(i);
    } else if (rel >= 0.75) {
      part.members[1].push_back(i);
    } else if (rel >= 0.5) {
      part.members[2].push_back(i);
    } else {
      part.members[3].push_back(i);
    }
  }
  return part;
}

EnvironmentQueues::EnvironmentQueues(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("environment queue capacity must be positive");
}

const std::deque<EnvironmentQueues::Entry>& EnvironmentQueues::queue(int env) const {
  if (env < 0 || env >= kNumEnvironments) throw NumericError("environment index out of range");
  return queues_[static_cast<size_t>(env)];
}

std::deque<EnvironmentQueues::Entry>& EnvironmentQueues::queue(int env) {
  return const_cast<std::deque<Entry>&>(
      static_cast<const EnvironmentQueues*>(this)->queue(env));
}

void EnvironmentQueues::push(int env, const SyntheticSample& sample, double entropy) {
  std::deque<Entry>& q = queue(env);
  q.push_back(Entry{sample, entropy});
  while (q.size() > capacity_) q.pop_front();
}

size_t EnvironmentQueues::size(int env) const { return queue(env).size(); }

SampleSet EnvironmentQueues::snapshot(int env) const {
  const std::deque<Entry>& q = queue(env);
  SampleSet out;
  out.reserve(q.size());
  for (const Entry& e : q) out.push_back(e.sample);
  return out;
}

std::vector<EnvironmentQueues::Entry> EnvironmentQueues::entries(int env) const {
  const std::deque<Entry>& q = queue(env);
  return std::vector<Entry>(q.begin(), q.end());
}

double EnvironmentQueues::mean_entropy(int env) const {
  const std::deque<Entry>& q = queue(env);
  if (q.empty()) return 0.0;
  double sum = 0.0;
  for (const Entry& e : q) sum += e.entropy;
  return sum / static_cast<double>(q.size());
}

void EnvironmentQueues::clear() {
  for (auto& q : queues_) q.clear();
}

std::array<double, kNumEnvironments> weights_from_entropies(
    const std::array<double, kNumEnvironments>& mean_entropies,
    const std::array<bool, kNumEnvironments>& active) {
  std::array<double, kNumEnvironments> w{};
  double m = -std::numeric_limits<double>::infinity();
  for (int e = 0; e < kNumEnvironments; ++e) {
    if (active[e]) m = std::max(m, -mean_entropies[e]);
  }
  if (!std::isfinite(m)) throw NumericError("environment weights need one active environment");
  double z = 0.0;
  for (int e = 0; e < kNumEnvironments; ++e) {
    if (!active[e]) continue;
    w[e] = std::exp(-mean_entropies[e] - m);
    z += w[e];
  }
  for (double& v : w) v /= z;
  return w;
}

std::array<double, kNumEnvironments> environment_weights(const EnvironmentQueues& queues,
                                                         const Policy& policy,
                                                         const Detector& detector) {
  std::array<double, kNumEnvironments> h{};
  std::array<bool, kNumEnvironments> active{};
  for (int e = 0; e < kNumEnvironments; ++e) {
    const SampleSet held = queues.snapshot(e);
    active[e] = !held.empty();
    if (held.empty()) continue;
    double sum = 0.0;
    for (const SyntheticSample& s : held) {
      sum += action_entropy(per_sample_distribution(policy, detector, s));
    }
    h[e] = sum / static_cast<double>(held.size());
  }
  return weights_from_entropies(h, active);
}

}  // namespace crda
