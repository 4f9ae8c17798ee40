#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "detector.hpp"
#include "environments.hpp"
#include "metrics.hpp"
#include "policy.hpp"
#include "ppo.hpp"
#include "rng.hpp"
#include "synthtask.hpp"

namespace crda {

// Everything that must survive a checkpoint/resume cycle bitwise-exactly.
struct TrainingState {
  int next_epoch = 0;
  double prev_val_auc = 0.5;  // baseline for the delta-AUC reward
  Detector detector;
  AdamState detector_opt;
  Policy policy;
  AdamState policy_opt;
  Critic critic;
  AdamState critic_opt;
  EnvironmentQueues queues{1};
  Rng data_rng;    // batch noise
  Rng action_rng;  // policy action draws (and the no_rl uniform fallback)
  Rng region_rng;  // curriculum region draws
  Rng state_rng;   // episode initial states
};

TrainingState fresh_training_state(const TrainConfig& cfg);

struct EvalResult {
  double auc = 0.5;
  double mean_ce = 0.0;
};

// Read-only: AUC over fake-probabilities plus mean CE. Needs both classes.
EvalResult evaluate(const Detector& det, const SampleSet& dataset);

// Runs training from `state` (fresh or resumed) to the configured horizon,
// writing metrics.jsonl, timing.jsonl, summary.json, effective_config and
// final.crda under cfg.engine.out_dir. cfg must be finalized.
RunReport run_training(const TrainConfig& cfg, TrainingState& state);

// Convenience: fresh state or resume per cfg.engine.resume_from, then run.
RunReport run_training(const TrainConfig& cfg);

// Ablation presets, mirroring the study rows:
//   1: no_rl + no_irm + no_curriculum   (plain ERM, uniform augmentation)
//   2: no_rl + no_irm
//   3: no_irm
//   4: no_rl
//   5: everything on
void apply_ablation_preset(TrainConfig& cfg, int preset);

}  // namespace crda
