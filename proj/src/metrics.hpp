#pragma once

#include <array>
#include <string>

#include "environments.hpp"
#include "rewards.hpp"

namespace crda {

// One row per epoch. Everything except wall_ms is deterministic for a fixed
// seed; wall_ms is therefore written to a separate timing file so the metrics
// stream stays byte-identical across runs.
struct MetricsRecord {
  int epoch = 0;
  double train_ce = 0.0;
  double bias_loss = 0.0;
  RewardBreakdown reward;  // per-step means, weighted with the epoch's lambda
  double val_auc = 0.5;
  double val_ce = 0.0;
  double shift_auc = 0.5;
  double q = 0.0;
  double beta = 0.0;
  double area_raw = 0.0;
  double area = 0.0;
  std::array<double, kNumEnvironments> env_weights{};
  double policy_entropy_mean = 0.0;
  double wall_ms = 0.0;

  void check_finite() const;  // throws NumericError naming the field
};

// Shortest round-trip decimal form (std::to_chars), shared by all JSON output.
std::string json_number(double v);

std::string metrics_json_line(const MetricsRecord& rec);
std::string timing_json_line(int epoch, double wall_ms);

struct RunReport {
  int epochs_run = 0;
  double final_val_auc = 0.5;
  double final_shift_auc = 0.5;
  double final_train_ce = 0.0;
  double wall_ms = 0.0;
  std::string metrics_path;
  std::string summary_path;
  std::string checkpoint_path;
};

// summary.json body; paths are reduced to bare file names so the bytes do not
// depend on where the run directory lives.
std::string summary_json(const RunReport& report);

void append_line(const std::string& path, const std::string& line);
void write_file(const std::string& path, const std::string& content);

}  // namespace crda
