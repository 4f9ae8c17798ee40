#include "config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace crda {

void EngineConfig::validate() const {
  if (epochs < 1) throw ConfigError("engine.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("engine.batch_size must be >= 1");
  if (batches_per_epoch < 1) throw ConfigError("engine.batches_per_epoch must be >= 1");
  if (val_size < 2) throw ConfigError("engine.val_size must be >= 2");
  if (shift_size < 2) throw ConfigError("engine.shift_size must be >= 2");
  if (latent_dim < 1) throw ConfigError("engine.latent_dim must be >= 1");
  if (detector_hidden < 1 || policy_hidden < 1 || critic_hidden < 1) {
    throw ConfigError("hidden widths must be >= 1");
  }
  if (!(detector_lr > 0.0)) throw ConfigError("engine.detector_lr must be positive");
  if (!(detector_weight_decay >= 0.0)) throw ConfigError("engine.detector_weight_decay must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("engine.checkpoint_every must be >= 0");
  if (halt_after_epoch < -1) throw ConfigError("engine.halt_after_epoch must be >= -1");
}

void TrainConfig::finalize() {
  curriculum.total_epochs = engine.epochs;
  engine.validate();
  curriculum.validate();
  ppo.validate();
  task.validate();
  irm.validate();
  rewards.validate();
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& section_key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("empty value for " + section_key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || !std::isfinite(d)) {
    throw ConfigError("invalid number for " + section_key + ": '" + v + "'");
  }
  return d;
}

int64_t parse_int(const std::string& section_key, const std::string& raw) {
  const std::string v = trim(raw);
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("invalid integer for " + section_key + ": '" + v + "'");
  }
  return out;
}

uint64_t parse_u64(const std::string& section_key, const std::string& raw) {
  const std::string v = trim(raw);
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("invalid unsigned integer for " + section_key + ": '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& section_key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for " + section_key + ": '" + v + "' (use true/false)");
}

std::array<double, 4> parse_vec4(const std::string& section_key, const std::string& raw) {
  std::array<double, 4> out{};
  std::string v = trim(raw);
  size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    const size_t comma = v.find(',', pos);
    const bool last = i == 3;
    if (last != (comma == std::string::npos)) {
      throw ConfigError(section_key + " needs exactly 4 comma-separated values");
    }
    const std::string part = last ? v.substr(pos) : v.substr(pos, comma - pos);
    out[static_cast<size_t>(i)] = parse_double(section_key, part);
    pos = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::string format_vec4(const std::array<double, 4>& v) {
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (i) out += ",";
    out += format_double(v[static_cast<size_t>(i)]);
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
};

const std::vector<Field>& field_registry() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    auto add_int = [&f](const char* sec, const char* key, std::function<int&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) { return std::to_string(ref(const_cast<TrainConfig&>(c))); },
          [ref](TrainConfig& c, const std::string& sk, const std::string& v) {
            ref(c) = static_cast<int>(parse_int(sk, v));
          }});
    };
    auto add_double = [&f](const char* sec, const char* key,
                           std::function<double&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) { return format_double(ref(const_cast<TrainConfig&>(c))); },
          [ref](TrainConfig& c, const std::string& sk, const std::string& v) {
            ref(c) = parse_double(sk, v);
          }});
    };
    auto add_bool = [&f](const char* sec, const char* key,
                         std::function<bool&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) {
            return std::string(ref(const_cast<TrainConfig&>(c)) ? "true" : "false");
          },
          [ref](TrainConfig& c, const std::string& sk, const std::string& v) {
            ref(c) = parse_bool(sk, v);
          }});
    };
    auto add_string = [&f](const char* sec, const char* key,
                           std::function<std::string&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) { return ref(const_cast<TrainConfig&>(c)); },
          [ref](TrainConfig& c, const std::string&, const std::string& v) { ref(c) = trim(v); }});
    };
    auto add_u64 = [&f](const char* sec, const char* key,
                        std::function<uint64_t&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) { return std::to_string(ref(const_cast<TrainConfig&>(c))); },
          [ref](TrainConfig& c, const std::string& sk, const std::string& v) {
            ref(c) = parse_u64(sk, v);
          }});
    };
    auto add_vec4 = [&f](const char* sec, const char* key,
                         std::function<std::array<double, 4>&(TrainConfig&)> ref) {
      f.push_back(Field{
          sec, key,
          [ref](const TrainConfig& c) { return format_vec4(ref(const_cast<TrainConfig&>(c))); },
          [ref](TrainConfig& c, const std::string& sk, const std::string& v) {
            ref(c) = parse_vec4(sk, v);
          }});
    };

    add_int("engine", "epochs", [](TrainConfig& c) -> int& { return c.engine.epochs; });
    add_int("engine", "batch_size", [](TrainConfig& c) -> int& { return c.engine.batch_size; });
    add_int("engine", "batches_per_epoch",
            [](TrainConfig& c) -> int& { return c.engine.batches_per_epoch; });
    add_u64("engine", "seed", [](TrainConfig& c) -> uint64_t& { return c.engine.seed; });
    add_string("engine", "out_dir", [](TrainConfig& c) -> std::string& { return c.engine.out_dir; });
    add_bool("engine", "no_rl", [](TrainConfig& c) -> bool& { return c.engine.no_rl; });
    add_bool("engine", "no_irm", [](TrainConfig& c) -> bool& { return c.engine.no_irm; });
    add_bool("engine", "no_curriculum",
             [](TrainConfig& c) -> bool& { return c.engine.no_curriculum; });
    add_int("engine", "halt_after_epoch",
            [](TrainConfig& c) -> int& { return c.engine.halt_after_epoch; });
    add_string("engine", "resume_from",
               [](TrainConfig& c) -> std::string& { return c.engine.resume_from; });
    add_int("engine", "checkpoint_every",
            [](TrainConfig& c) -> int& { return c.engine.checkpoint_every; });
    add_int("engine", "val_size", [](TrainConfig& c) -> int& { return c.engine.val_size; });
    add_int("engine", "shift_size", [](TrainConfig& c) -> int& { return c.engine.shift_size; });
    add_bool("engine", "export_datasets",
             [](TrainConfig& c) -> bool& { return c.engine.export_datasets; });
    add_int("engine", "latent_dim", [](TrainConfig& c) -> int& { return c.engine.latent_dim; });
    add_int("engine", "detector_hidden",
            [](TrainConfig& c) -> int& { return c.engine.detector_hidden; });
    add_int("engine", "policy_hidden",
            [](TrainConfig& c) -> int& { return c.engine.policy_hidden; });
    add_int("engine", "critic_hidden",
            [](TrainConfig& c) -> int& { return c.engine.critic_hidden; });
    add_double("engine", "detector_lr",
               [](TrainConfig& c) -> double& { return c.engine.detector_lr; });
    add_double("engine", "detector_weight_decay",
               [](TrainConfig& c) -> double& { return c.engine.detector_weight_decay; });

    add_double("curriculum", "beta_max",
               [](TrainConfig& c) -> double& { return c.curriculum.beta_max; });
    add_double("curriculum", "steepness",
               [](TrainConfig& c) -> double& { return c.curriculum.steepness; });
    add_double("curriculum", "peak_phase",
               [](TrainConfig& c) -> double& { return c.curriculum.peak_phase; });
    add_double("curriculum", "area_full",
               [](TrainConfig& c) -> double& { return c.curriculum.area_full; });
    add_double("curriculum", "area_min",
               [](TrainConfig& c) -> double& { return c.curriculum.area_min; });
    add_double("curriculum", "region_decay",
               [](TrainConfig& c) -> double& { return c.curriculum.region_decay; });
    add_double("curriculum", "region_sigma",
               [](TrainConfig& c) -> double& { return c.curriculum.region_sigma; });
    add_bool("curriculum", "monotone_data_course",
             [](TrainConfig& c) -> bool& { return c.curriculum.monotone_data_course; });
    add_double("curriculum", "organ_area_left_eye",
               [](TrainConfig& c) -> double& { return c.curriculum.organ_areas[0]; });
    add_double("curriculum", "organ_area_right_eye",
               [](TrainConfig& c) -> double& { return c.curriculum.organ_areas[1]; });
    add_double("curriculum", "organ_area_nose",
               [](TrainConfig& c) -> double& { return c.curriculum.organ_areas[2]; });
    add_double("curriculum", "organ_area_mouth",
               [](TrainConfig& c) -> double& { return c.curriculum.organ_areas[3]; });

    add_double("ppo", "clip", [](TrainConfig& c) -> double& { return c.ppo.clip; });
    add_int("ppo", "update_epochs", [](TrainConfig& c) -> int& { return c.ppo.update_epochs; });
    add_double("ppo", "lr", [](TrainConfig& c) -> double& { return c.ppo.lr; });
    add_double("ppo", "gae_lambda", [](TrainConfig& c) -> double& { return c.ppo.gae_lambda; });
    add_double("ppo", "discount", [](TrainConfig& c) -> double& { return c.ppo.discount; });
    add_double("ppo", "max_grad_norm",
               [](TrainConfig& c) -> double& { return c.ppo.max_grad_norm; });
    add_double("ppo", "value_coef", [](TrainConfig& c) -> double& { return c.ppo.value_coef; });

    add_int("task", "organ_block_dim",
            [](TrainConfig& c) -> int& { return c.task.organ_block_dim; });
    add_int("task", "spurious_dim", [](TrainConfig& c) -> int& { return c.task.spurious_dim; });
    add_double("task", "noise_std", [](TrainConfig& c) -> double& { return c.task.noise_std; });
    add_double("task", "causal_strength",
               [](TrainConfig& c) -> double& { return c.task.causal_strength; });
    add_double("task", "spurious_strength",
               [](TrainConfig& c) -> double& { return c.task.spurious_strength; });

    add_double("irm", "omega", [](TrainConfig& c) -> double& { return c.irm.omega; });
    add_double("irm", "gamma", [](TrainConfig& c) -> double& { return c.irm.gamma; });
    add_bool("irm", "weighted_penalty",
             [](TrainConfig& c) -> bool& { return c.irm.weighted_penalty; });

    add_vec4("rewards", "lambda_early",
             [](TrainConfig& c) -> std::array<double, 4>& { return c.rewards.early; });
    add_vec4("rewards", "lambda_mid",
             [](TrainConfig& c) -> std::array<double, 4>& { return c.rewards.mid; });
    add_vec4("rewards", "lambda_late",
             [](TrainConfig& c) -> std::array<double, 4>& { return c.rewards.late; });
    add_double("rewards", "early_end",
               [](TrainConfig& c) -> double& { return c.rewards.early_end; });
    add_double("rewards", "late_start",
               [](TrainConfig& c) -> double& { return c.rewards.late_start; });
    return f;
  }();
  return fields;
}

const Field& find_field(const std::string& section, const std::string& key) {
  for (const Field& f : field_registry()) {
    if (section == f.section && key == f.key) return f;
  }
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const Field& f : field_registry()) {
        if (section == f.section) {
          known = true;
          break;
        }
      }
      if (!known) throw ConfigError("unknown config section '[" + section + "]'");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field& f = find_field(section, key);
    f.set(cfg, section + "." + key, value);
  }
  return cfg;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading config file '" + path + "'");
  return parse_config_text(buf.str());
}

void apply_override(TrainConfig& cfg, const std::string& dotted_key, const std::string& value) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("override key must be section.key, got '" + dotted_key + "'");
  }
  const std::string section = trim(dotted_key.substr(0, dot));
  const std::string key = trim(dotted_key.substr(dot + 1));
  const Field& f = find_field(section, key);
  f.set(cfg, section + "." + key, value);
}

std::string get_config_value(const TrainConfig& cfg, const std::string& dotted_key) {
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("config key must be section.key, got '" + dotted_key + "'");
  }
  const Field& f = find_field(trim(dotted_key.substr(0, dot)), trim(dotted_key.substr(dot + 1)));
  return f.get(cfg);
}

std::string serialize_config(const TrainConfig& cfg) {
  std::string out;
  std::string current;
  for (const Field& f : field_registry()) {
    if (current != f.section) {
      if (!current.empty()) out += "\n";
      current = f.section;
      out += "[" + current + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace crda
