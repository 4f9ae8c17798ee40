#include "doctest.h"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "synthtask.hpp"

#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

using namespace crda;

namespace {
const Region& full_face(const RegionPool& pool) { return pool.regions[14]; }  // mask 15

RegionPool default_pool() { return build_region_pool({0.2, 0.2, 0.25, 0.35}, 1.0); }
}  // namespace

TEST_CASE("task dimensions are derived from the block layout") {
  TaskConfig cfg;
  CHECK(cfg.causal_dim() == 16);       // 4 organs x 4 dims
  CHECK(cfg.spurious_offset() == 16);
  CHECK(cfg.feature_dim() == 23);      // 16 causal + 7 spurious
  TaskConfig wide;
  wide.organ_block_dim = 3;
  wide.spurious_dim = 9;
  CHECK(wide.causal_dim() == 12);
  CHECK(wide.feature_dim() == 21);
  TaskConfig bad;
  bad.spurious_dim = 5;  // cannot hold 7 orthogonal signatures
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = TaskConfig{};
  bad.noise_std = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("real samples are pure noise with real labels") {
  TaskConfig cfg;
  Rng rng(1);
  const SampleSet reals = generate_real(cfg, 40, rng);
  REQUIRE(reals.size() == 40);
  double sumsq = 0.0;
  int count = 0;
  for (const SyntheticSample& s : reals) {
    CHECK(s.label == 0);
    CHECK(s.op_used == -1);
    CHECK(s.region_mask == 0);
    REQUIRE(s.features.size() == 23);
    for (double f : s.features) {
      sumsq += f * f;
      ++count;
    }
  }
  // Feature variance should track noise_std^2 = 0.25.
  CHECK(sumsq / count == doctest::Approx(0.25).epsilon(0.1));
  Rng a(3), b(3);
  CHECK(generate_real(cfg, 5, a)[4].features == generate_real(cfg, 5, b)[4].features);
}

TEST_CASE("augmentation adds the causal footprint only inside the region") {
  TaskConfig cfg;
  const RegionPool pool = default_pool();
  Rng rng(2);
  const SampleSet reals = generate_real(cfg, 1, rng);
  const Region& eyes = pool.regions[2];  // mask 3 = organs 0 and 1
  const SyntheticSample fake = apply_augmentation(reals[0], 4, eyes, cfg);

  CHECK(fake.label == 1);
  CHECK(fake.op_used == 4);
  CHECK(fake.region_mask == 3);
  CHECK(fake.region_area == doctest::Approx(0.4).epsilon(1e-12));
  for (int j = 0; j < 23; ++j) {
    const double diff = fake.features[static_cast<size_t>(j)] -
                        reals[0].features[static_cast<size_t>(j)];
    if (j < 8) {
      CHECK(diff == doctest::Approx(cfg.causal_strength).epsilon(1e-12));
    } else if (j == 16 + 4) {
      CHECK(diff == doctest::Approx(cfg.spurious_strength).epsilon(1e-12));
    } else {
      CHECK(diff == 0.0);
    }
  }
  // Signatures of different ops touch different spurious coordinates.
  const SyntheticSample other = apply_augmentation(reals[0], 6, eyes, cfg);
  CHECK(other.features[16 + 6] - reals[0].features[16 + 6] ==
        doctest::Approx(cfg.spurious_strength).epsilon(1e-12));
  CHECK(other.features[16 + 4] == reals[0].features[16 + 4]);

  CHECK_THROWS_AS(apply_augmentation(fake, 1, eyes, cfg), ConfigError);
  CHECK_THROWS_AS(apply_augmentation(reals[0], 7, eyes, cfg), ConfigError);
  Region empty;
  CHECK_THROWS_AS(apply_augmentation(reals[0], 0, empty, cfg), ConfigError);
}

TEST_CASE("train batches mix round(q*B) fakes with their base reals") {
  TaskConfig cfg;
  const RegionPool pool = default_pool();
  Rng rng(5);
  const struct { double q; int expect; } cases[] = {
      {0.0, 0}, {0.25, 8}, {0.5, 16}, {0.76, 24}, {1.0, 32}, {0.01, 0}, {0.484, 15}};
  for (const auto& c : cases) {
    const TrainBatch batch = make_train_batch(cfg, c.q, full_face(pool), 3, 32, rng);
    REQUIRE(batch.samples.size() == 32);
    REQUIRE(batch.base_reals.size() == 32);
    int fakes = 0;
    for (const SyntheticSample& s : batch.samples) {
      if (s.label == 1) {
        ++fakes;
        CHECK(s.op_used == 3);
        CHECK(s.region_mask == 15);
      } else {
        CHECK(s.op_used == -1);
      }
    }
    CHECK(fakes == c.expect);
    for (const SyntheticSample& s : batch.base_reals) CHECK(s.label == 0);
  }
  CHECK_THROWS_AS(make_train_batch(cfg, 1.5, full_face(pool), 0, 8, rng), ConfigError);
  CHECK_THROWS_AS(make_train_batch(cfg, 0.5, full_face(pool), 0, 0, rng), ConfigError);
}

TEST_CASE("validation set is balanced with ops spread round-robin") {
  TaskConfig cfg;
  const RegionPool pool = default_pool();
  Rng rng(7);
  const SampleSet val = make_validation_set(cfg, 140, full_face(pool), rng);
  REQUIRE(val.size() == 140);
  int fakes = 0;
  std::array<int, kNumOps> per_op{};
  for (const SyntheticSample& s : val) {
    if (s.label == 1) {
      ++fakes;
      REQUIRE(s.op_used >= 0);
      ++per_op[static_cast<size_t>(s.op_used)];
      CHECK(s.region_mask == 15);
    }
  }
  CHECK(fakes == 70);
  for (int c : per_op) CHECK(c == 10);  // 70 fakes over 7 ops
  Rng odd(1);
  CHECK_THROWS_AS(make_validation_set(cfg, 141, full_face(pool), odd), ConfigError);
}

TEST_CASE("shift set moves each signature to a different operator") {
  TaskConfig cfg;
  cfg.noise_std = 1e-3;  // keep the signature locations unambiguous
  const RegionPool pool = default_pool();
  Rng rng(11);
  const SampleSet shift = spurious_shift_set(cfg, 280, full_face(pool), rng);
  int fakes = 0;
  for (const SyntheticSample& s : shift) {
    if (s.label != 1) continue;
    ++fakes;
    // Exactly one spurious coordinate is boosted, and it is not op_used's.
    int boosted = -1;
    for (int j = 0; j < 7; ++j) {
      if (s.features[static_cast<size_t>(16 + j)] > cfg.spurious_strength / 2.0) {
        CHECK(boosted == -1);
        boosted = j;
      }
    }
    REQUIRE(boosted != -1);
    CHECK(boosted != s.op_used);
    // The causal footprint is untouched: every organ block still carries +c.
    for (int j = 0; j < 16; ++j) {
      CHECK(s.features[static_cast<size_t>(j)] ==
            doctest::Approx(cfg.causal_strength).epsilon(0.01));
    }
  }
  CHECK(fakes == 140);
}

TEST_CASE("causal score separates classes at the calibrated difficulty") {
  TaskConfig cfg;  // c = 1.0, noise_std = 0.5
  const RegionPool pool = default_pool();
  Rng rng(42);
  const SampleSet val = make_validation_set(cfg, 2000, full_face(pool), rng);
  std::vector<double> scores;
  std::vector<int> labels;
  for (const SyntheticSample& s : val) {
    scores.push_back(causal_block_score(cfg, s));
    labels.push_back(s.label);
  }
  const double auc = oracle::auc(scores, labels);
  CHECK(auc >= 0.95);

  // The same scorer transfers to the shift set: the causal footprint is intact.
  Rng rng2(42);
  const SampleSet shifted = spurious_shift_set(cfg, 2000, full_face(pool), rng2);
  scores.clear();
  labels.clear();
  for (const SyntheticSample& s : shifted) {
    scores.push_back(causal_block_score(cfg, s));
    labels.push_back(s.label);
  }
  CHECK(oracle::auc(scores, labels) >= 0.95);
}

TEST_CASE("csv export carries the header and one row per sample") {
  TaskConfig cfg;
  const RegionPool pool = default_pool();
  Rng rng(3);
  SampleSet set = generate_real(cfg, 2, rng);
  set.push_back(apply_augmentation(set[0], 2, full_face(pool), cfg));
  const std::string csv = samples_to_csv(set);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("label,op,f0,f1,", 0) == 0);
  CHECK(line.find(",f22") != std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (rows <= 2) CHECK(line.rfind("0,-1,", 0) == 0);
    else CHECK(line.rfind("1,2,", 0) == 0);
  }
  CHECK(rows == 3);
}
