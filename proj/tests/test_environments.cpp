#include "doctest.h"
#include "detector.hpp"
#include "environments.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "synthtask.hpp"

#include <cmath>
#include <set>
#include <vector>

using namespace crda;

namespace {
constexpr double kLn7 = 1.9459101490553132;

SyntheticSample tagged(int tag) {
  SyntheticSample s;
  s.features.assign(4, static_cast<double>(tag));
  return s;
}
}  // namespace

TEST_CASE("partition matches the frozen hand example") {
  const Partition p = partition_by_entropy({0.1, 1.9, 1.0, 0.6});
  CHECK(p.members[0] == std::vector<size_t>{0});  // anchor, rel 0.0526
  CHECK(p.members[1] == std::vector<size_t>{1});  // rel 1.0 >= 0.75
  CHECK(p.members[2] == std::vector<size_t>{2});  // rel 0.526 in [0.5, 0.75)
  CHECK(p.members[3] == std::vector<size_t>{3});  // rel 0.316 in [0.25, 0.5)
}

TEST_CASE("partition edge cases: ties, singletons, all-zero batches") {
  // All-equal entropies: index 0 anchors the dominant set; the rest sit at
  // rel = 1 in the top adversarial band.
  const Partition eq = partition_by_entropy({0.7, 0.7, 0.7});
  CHECK(eq.members[0] == std::vector<size_t>{0});
  CHECK(eq.members[1] == std::vector<size_t>{1, 2});

  const Partition one = partition_by_entropy({1.3});
  CHECK(one.members[0] == std::vector<size_t>{0});
  CHECK(one.members[1].empty());

  // H_max = 0: everything is dominant.
  const Partition zero = partition_by_entropy({0.0, 0.0, 0.0, 0.0});
  CHECK(zero.members[0].size() == 4);

  // Low-entropy non-anchor members join the dominant set via rel < 0.25.
  const Partition low = partition_by_entropy({0.01, 0.02, 1.0});
  CHECK(low.members[0] == std::vector<size_t>{0, 1});

  CHECK_THROWS_AS(partition_by_entropy({}), NumericError);
  CHECK_THROWS_AS(partition_by_entropy({0.5, -0.1}), NumericError);
  CHECK_THROWS_AS(partition_by_entropy({0.5, std::nan("")}), NumericError);
}

TEST_CASE("partition agrees with the oracle on 1000 random batches") {
  Rng rng(2718);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + static_cast<int>(rng.uniform_int(32));
    std::vector<double> h(static_cast<size_t>(n));
    for (double& v : h) {
      v = rng.uniform01() * kLn7;
      if (rng.uniform_int(8) == 0) v = 0.0;              // exact zeros
      if (rng.uniform_int(8) == 0 && &v != &h[0]) v = h[0];  // forced ties
    }
    const Partition got = partition_by_entropy(h);
    const std::vector<int> expect = oracle::partition(h);

    size_t total = 0;
    std::set<size_t> seen;
    for (int env = 0; env < kNumEnvironments; ++env) {
      for (size_t idx : got.members[static_cast<size_t>(env)]) {
        CHECK(expect[idx] == env);
        seen.insert(idx);
        ++total;
      }
    }
    // Disjoint cover of the batch.
    CHECK(total == h.size());
    CHECK(seen.size() == h.size());
  }
}

TEST_CASE("queues evict oldest beyond capacity") {
  EnvironmentQueues q(2);
  CHECK(q.capacity() == 2);
  CHECK(q.empty(0));
  q.push(0, tagged(1), 0.1);
  q.push(0, tagged(2), 0.2);
  q.push(0, tagged(3), 0.3);  // evicts tag 1
  CHECK(q.size(0) == 2);
  const SampleSet held = q.snapshot(0);
  CHECK(held[0].features[0] == 2.0);
  CHECK(held[1].features[0] == 3.0);
  CHECK(q.mean_entropy(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(q.size(1) == 0);
  CHECK(q.mean_entropy(1) == 0.0);
  q.clear();
  CHECK(q.empty(0));
  CHECK_THROWS_AS(EnvironmentQueues(0), ConfigError);
  CHECK_THROWS_AS(q.push(4, tagged(1), 0.0), NumericError);
  CHECK_THROWS_AS(q.size(-1), NumericError);
}

TEST_CASE("queue contents replay a reference FIFO under random traffic") {
  Rng rng(11);
  const size_t cap = 5;
  EnvironmentQueues q(cap);
  std::vector<std::vector<int>> reference(kNumEnvironments);
  for (int step = 0; step < 500; ++step) {
    const int env = static_cast<int>(rng.uniform_int(kNumEnvironments));
    q.push(env, tagged(step), 0.0);
    auto& ref = reference[static_cast<size_t>(env)];
    ref.push_back(step);
    if (ref.size() > cap) ref.erase(ref.begin());
    for (int e = 0; e < kNumEnvironments; ++e) {
      REQUIRE(q.size(e) <= cap);  // never exceeds capacity
      const SampleSet held = q.snapshot(e);
      const auto& want = reference[static_cast<size_t>(e)];
      REQUIRE(held.size() == want.size());
      for (size_t i = 0; i < held.size(); ++i) {
        CHECK(held[i].features[0] == static_cast<double>(want[i]));
      }
    }
  }
}

TEST_CASE("entropy softmax weights reproduce the closed forms") {
  // Mean entropies (0, ln7, ln7, ln7) -> (0.7, 0.1, 0.1, 0.1).
  const std::array<bool, 4> all{true, true, true, true};
  const auto w = weights_from_entropies({0.0, kLn7, kLn7, kLn7}, all);
  CHECK(w[0] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(w[1] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(w[2] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(w[3] == doctest::Approx(0.1).epsilon(1e-9));

  const auto uniform = weights_from_entropies({0.4, 0.4, 0.4, 0.4}, all);
  for (double v : uniform) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

  // A single active environment takes all the mass.
  const auto solo =
      weights_from_entropies({1.0, 2.0, 3.0, 4.0}, {false, true, false, false});
  CHECK(solo[0] == 0.0);
  CHECK(solo[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solo[2] == 0.0);

  // Shift invariance: adding a constant to every entropy changes nothing.
  const auto base = weights_from_entropies({0.1, 0.9, 0.4, 0.6}, all);
  const auto shifted = weights_from_entropies({5.1, 5.9, 5.4, 5.6}, all);
  double sum = 0.0;
  for (int e = 0; e < 4; ++e) {
    CHECK(base[e] == doctest::Approx(shifted[e]).epsilon(1e-12));
    sum += base[e];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // Lower mean entropy always earns more weight.
  CHECK(base[0] > base[2]);
  CHECK(base[2] > base[3]);
  CHECK(base[3] > base[1]);

  CHECK_THROWS_AS(weights_from_entropies({1, 1, 1, 1}, {false, false, false, false}),
                  NumericError);
}

TEST_CASE("environment weights recompute entropies under the current policy") {
  TaskConfig cfg;
  Rng rng(55);
  const SampleSet samples = generate_real(cfg, 6, rng);
  const Detector det = detector_init(cfg.feature_dim(), 8, 6, rng);
  const Policy pol = policy_init(6, 8, rng);

  EnvironmentQueues q(8);
  // Deliberately wrong cached entropies: live weights must ignore them.
  q.push(0, samples[0], 999.0);
  q.push(0, samples[1], 999.0);
  q.push(1, samples[2], 999.0);
  q.push(3, samples[3], 999.0);
  q.push(3, samples[4], 999.0);

  const auto got = environment_weights(q, pol, det);

  std::array<double, kNumEnvironments> mean{};
  std::array<bool, kNumEnvironments> active{};
  for (int e = 0; e < kNumEnvironments; ++e) {
    const SampleSet held = q.snapshot(e);
    active[static_cast<size_t>(e)] = !held.empty();
    for (const SyntheticSample& s : held) {
      mean[static_cast<size_t>(e)] +=
          action_entropy(per_sample_distribution(pol, det, s)) / held.size();
    }
  }
  const auto expect = weights_from_entropies(mean, active);
  for (int e = 0; e < kNumEnvironments; ++e) {
    CHECK(got[static_cast<size_t>(e)] ==
          doctest::Approx(expect[static_cast<size_t>(e)]).epsilon(1e-12));
  }
  CHECK(got[2] == 0.0);  // inactive environment
  CHECK(got[0] + got[1] + got[3] == doctest::Approx(1.0).epsilon(1e-12));
}
