#include "metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "errors.hpp"

namespace crda {

void MetricsRecord::check_finite() const {
  const auto check = [this](double v, const char* name) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite metric '") + name + "' at epoch " +
                         std::to_string(epoch));
    }
  };
  check(train_ce, "train_ce");
  check(bias_loss, "bias_loss");
  check(reward.total, "reward.total");
  check(reward.stability, "reward.stability");
  check(reward.delta_auc, "reward.delta_auc");
  check(reward.adversarial, "reward.adversarial");
  check(reward.kl, "reward.kl");
  check(val_auc, "val_auc");
  check(val_ce, "val_ce");
  check(shift_auc, "shift_auc");
  check(q, "q");
  check(beta, "beta");
  check(area_raw, "area_raw");
  check(area, "area");
  for (double w : env_weights) check(w, "env_weights");
  check(policy_entropy_mean, "policy_entropy_mean");
}

std::string json_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

namespace {

std::string json_array4(const std::array<double, 4>& v) {
  std::string out = "[";
  for (int i = 0; i < 4; ++i) {
    if (i) out += ",";
    out += json_number(v[static_cast<size_t>(i)]);
  }
  return out + "]";
}

}  // namespace

std::string metrics_json_line(const MetricsRecord& rec) {
  std::string out = "{";
  out += "\"epoch\":" + std::to_string(rec.epoch);
  out += ",\"train_ce\":" + json_number(rec.train_ce);
  out += ",\"bias_loss\":" + json_number(rec.bias_loss);
  out += ",\"reward\":{";
  out += "\"stability\":" + json_number(rec.reward.stability);
  out += ",\"delta_auc\":" + json_number(rec.reward.delta_auc);
  out += ",\"adversarial\":" + json_number(rec.reward.adversarial);
  out += ",\"kl\":" + json_number(rec.reward.kl);
  out += ",\"lambda\":" + json_array4(rec.reward.weights.lambda);
  out += ",\"total\":" + json_number(rec.reward.total);
  out += "}";
  out += ",\"val_auc\":" + json_number(rec.val_auc);
  out += ",\"val_ce\":" + json_number(rec.val_ce);
  out += ",\"shift_auc\":" + json_number(rec.shift_auc);
  out += ",\"q\":" + json_number(rec.q);
  out += ",\"beta\":" + json_number(rec.beta);
  out += ",\"area_raw\":" + json_number(rec.area_raw);
  out += ",\"area\":" + json_number(rec.area);
  out += ",\"env_weights\":" + json_array4(rec.env_weights);
  out += ",\"policy_entropy_mean\":" + json_number(rec.policy_entropy_mean);
  out += "}";
  return out;
}

std::string timing_json_line(int epoch, double wall_ms) {
  return "{\"epoch\":" + std::to_string(epoch) + ",\"wall_ms\":" + json_number(wall_ms) + "}";
}

std::string summary_json(const RunReport& report) {
  const auto basename = [](const std::string& path) {
    const size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
  };
  std::string out = "{\n";
  out += "  \"epochs_run\": " + std::to_string(report.epochs_run) + ",\n";
  out += "  \"final_val_auc\": " + json_number(report.final_val_auc) + ",\n";
  out += "  \"final_shift_auc\": " + json_number(report.final_shift_auc) + ",\n";
  out += "  \"final_train_ce\": " + json_number(report.final_train_ce) + ",\n";
  out += "  \"metrics\": \"" + basename(report.metrics_path) + "\",\n";
  out += "  \"checkpoint\": \"" + basename(report.checkpoint_path) + "\"\n";
  out += "}\n";
  return out;
}

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open '" + path + "' for append");
  out << line << "\n";
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for write");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace crda
