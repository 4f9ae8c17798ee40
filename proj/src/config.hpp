#pragma once

#include <cstdint>
#include <string>

#include "irm.hpp"
#include "ppo.hpp"
#include "rewards.hpp"
#include "schedules.hpp"
#include "synthtask.hpp"

namespace crda {

struct EngineConfig {
  int epochs = 30;
  int batch_size = 32;
  int batches_per_epoch = 50;
  uint64_t seed = 42;
  std::string out_dir = "out";
  bool no_rl = false;
  bool no_irm = false;
  bool no_curriculum = false;
  int halt_after_epoch = -1;   // stop early after this epoch completes; -1 disables
  std::string resume_from;     // checkpoint path; empty starts fresh
  int checkpoint_every = 0;    // additionally checkpoint every N epochs; 0 disables
  int val_size = 2000;
  int shift_size = 2000;
  bool export_datasets = false;
  int latent_dim = 32;
  int detector_hidden = 64;
  int policy_hidden = 64;
  int critic_hidden = 64;
  double detector_lr = 1e-4;
  double detector_weight_decay = 5e-4;

  void validate() const;
};

struct TrainConfig {
  EngineConfig engine;
  CurriculumConfig curriculum;
  PpoConfig ppo;
  TaskConfig task;
  IrmConfig irm;
  RewardCourse rewards;

  // Syncs derived fields (curriculum horizon, latent dims) and validates
  // every section. Call after any mutation.
  void finalize();
};

// Parses the `[section]` / `key = value` format. Unknown sections or keys are
// rejected; `#` and `;` start comments.
TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// Applies one `section.key=value` override.
void apply_override(TrainConfig& cfg, const std::string& dotted_key, const std::string& value);

// Current value of one `section.key`, in the same text form serialize uses.
std::string get_config_value(const TrainConfig& cfg, const std::string& dotted_key);

// Full config as config-file text; every key is written, so the output
// documents the effective settings. parse(serialize(x)) == x.
std::string serialize_config(const TrainConfig& cfg);

}  // namespace crda
