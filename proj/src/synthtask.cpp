#include "synthtask.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"

namespace crda {

void TaskConfig::validate() const {
  if (organ_block_dim < 1) throw ConfigError("task.organ_block_dim must be >= 1");
  if (spurious_dim < kNumOps)
    throw ConfigError("task.spurious_dim must be >= 7 (orthogonal signatures)");
  if (!(noise_std > 0.0)) throw ConfigError("task.noise_std must be > 0");
  if (!(causal_strength > 0.0)) throw ConfigError("task.causal_strength must be > 0");
  if (!(spurious_strength >= 0.0)) throw ConfigError("task.spurious_strength must be >= 0");
}

SampleSet generate_real(const TaskConfig& cfg, int n, Rng& rng) {
  if (n < 1) throw ConfigError("generate_real: n must be >= 1");
  SampleSet out;
  out.reserve(n);
  const int d = cfg.feature_dim();
  for (int i = 0; i < n; ++i) {
    SyntheticSample s;
    s.features.resize(d);
    for (int j = 0; j < d; ++j) s.features[j] = cfg.noise_std * rng.normal();
    out.push_back(std::move(s));
  }
  return out;
}

SyntheticSample apply_augmentation(const SyntheticSample& real, int op_index,
                                   const Region& region, const TaskConfig& cfg) {
  if (real.label != 0) throw ConfigError("apply_augmentation: sample is already fake");
  if (op_index < 0 || op_index >= kNumOps)
    throw ConfigError("apply_augmentation: op_index out of range");
  if (region.organ_mask == 0 || region.organ_mask > 15)
    throw ConfigError("apply_augmentation: empty region");

  SyntheticSample fake = real;
  for (int o = 0; o < kOrganCount; ++o) {
    if (!((region.organ_mask >> o) & 1)) continue;
    const int base = o * cfg.organ_block_dim;
    for (int j = 0; j < cfg.organ_block_dim; ++j)
      fake.features[base + j] += cfg.causal_strength;
  }
  fake.features[cfg.spurious_offset() + op_index] += cfg.spurious_strength;
  fake.label = 1;
  fake.op_used = op_index;
  fake.region_mask = region.organ_mask;
  fake.region_area = region.area;
  return fake;
}

TrainBatch make_train_batch(const TaskConfig& cfg, double q, const Region& region,
                            int op_index, int batch_size, Rng& rng) {
  if (batch_size < 1) throw ConfigError("make_train_batch: batch_size must be >= 1");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("make_train_batch: q outside [0,1]");

  TrainBatch batch;
  batch.base_reals = generate_real(cfg, batch_size, rng);
  const int n_fake = static_cast<int>(std::lround(q * batch_size));
  batch.samples.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) {
    if (i < n_fake)
      batch.samples.push_back(apply_augmentation(batch.base_reals[i], op_index, region, cfg));
    else
      batch.samples.push_back(batch.base_reals[i]);
  }
  rng.shuffle(batch.samples);
  return batch;
}

namespace {

SampleSet balanced_set(const TaskConfig& cfg, int n, const Region& full_face,
                       Rng& rng, bool shift_signature) {
  if (n < 2 || n % 2 != 0) throw ConfigError("evaluation set size must be even and >= 2");
  SampleSet out = generate_real(cfg, n, rng);
  const int n_fake = n / 2;
  for (int i = 0; i < n_fake; ++i) {
    const int op = i % kNumOps;  // uniform spread, exact when divisible
    SyntheticSample fake = apply_augmentation(out[i], op, full_face, cfg);
    if (shift_signature) {
      const int other = static_cast<int>(rng.uniform_int(kNumOps - 1));
      const int swapped = other >= op ? other + 1 : other;
      fake.features[cfg.spurious_offset() + op] -= cfg.spurious_strength;
      fake.features[cfg.spurious_offset() + swapped] += cfg.spurious_strength;
    }
    out[i] = std::move(fake);
  }
  rng.shuffle(out);
  return out;
}

}  // namespace

SampleSet make_validation_set(const TaskConfig& cfg, int n, const Region& full_face,
                              Rng& rng) {
  return balanced_set(cfg, n, full_face, rng, false);
}

SampleSet spurious_shift_set(const TaskConfig& cfg, int n, const Region& full_face,
                             Rng& rng) {
  return balanced_set(cfg, n, full_face, rng, true);
}

double causal_block_score(const TaskConfig& cfg, const SyntheticSample& s) {
  double sum = 0.0;
  for (int j = 0; j < cfg.causal_dim(); ++j) sum += s.features[j];
  return sum;
}

std::string samples_to_csv(const SampleSet& set) {
  std::string out = "label,op";
  if (!set.empty())
    for (size_t j = 0; j < set[0].features.size(); ++j)
      out += ",f" + std::to_string(j);
  out += "\n";
  char buf[40];
  for (const auto& s : set) {
    out += std::to_string(s.label) + "," + std::to_string(s.op_used);
    for (double f : s.features) {
      std::snprintf(buf, sizeof(buf), ",%.12f", f);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_samples_csv(const SampleSet& set, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f << samples_to_csv(set);
}

}  // namespace crda
