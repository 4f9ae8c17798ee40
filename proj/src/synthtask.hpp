#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"
#include "schedules.hpp"

namespace crda {

constexpr int kNumOps = 7;  // abstract augmentation operators

// Synthetic detection task: 4 causal "organ" feature blocks shared by every
// operator, plus a spurious block where each operator leaves its own
// signature. Signatures are the canonical basis vectors of the spurious
// block, so they are pairwise orthogonal by construction.
struct TaskConfig {
  int organ_block_dim = 4;
  int spurious_dim = 7;
  double noise_std = 0.5;
  double causal_strength = 1.0;    // invariant forgery footprint
  double spurious_strength = 2.0;  // operator-specific shortcut

  int causal_dim() const { return kOrganCount * organ_block_dim; }
  int feature_dim() const { return causal_dim() + spurious_dim; }
  int spurious_offset() const { return causal_dim(); }
  void validate() const;
};

struct SyntheticSample {
  std::vector<double> features;
  int label = 0;         // 0 real, 1 fake
  int op_used = -1;      // 0..6 when fake
  uint8_t region_mask = 0;
  double region_area = 0.0;
};

using SampleSet = std::vector<SyntheticSample>;

// n real samples: pure Gaussian noise in every block, label 0.
SampleSet generate_real(const TaskConfig& cfg, int n, Rng& rng);

// Applies operator op_index inside `region`: adds the causal footprint to the
// organ blocks in the region and the operator signature to the spurious
// block. The input must be a real sample.
SyntheticSample apply_augmentation(const SyntheticSample& real, int op_index,
                                   const Region& region, const TaskConfig& cfg);

struct TrainBatch {
  SampleSet samples;     // shuffled mix, round(q*batch_size) fakes
  SampleSet base_reals;  // the untouched real sources, batch order
};

TrainBatch make_train_batch(const TaskConfig& cfg, double q, const Region& region,
                            int op_index, int batch_size, Rng& rng);

// n/2 reals + n/2 fakes spread uniformly over all 7 operators, full-face
// regions. n must be even.
SampleSet make_validation_set(const TaskConfig& cfg, int n, const Region& full_face,
                              Rng& rng);

// Same construction, but every fake carries a uniformly random *other*
// operator's signature: the op<->signature correlation is broken while the
// causal footprint is preserved.
SampleSet spurious_shift_set(const TaskConfig& cfg, int n, const Region& full_face,
                             Rng& rng);

// Summed causal-block activation; the analytic reference scorer used to
// calibrate task difficulty.
double causal_block_score(const TaskConfig& cfg, const SyntheticSample& s);

// CSV export "label,op,f0,f1,..." for external inspection.
std::string samples_to_csv(const SampleSet& set);
void write_samples_csv(const SampleSet& set, const std::string& path);

}  // namespace crda
