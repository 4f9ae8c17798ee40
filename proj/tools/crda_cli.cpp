// crda command-line front end. Links against the public C API only.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crda/crda.h"

namespace {

int exit_code(crda_status st) {
  switch (st) {
    case CRDA_OK: return 0;
    case CRDA_ERR_CONFIG: return 2;
    case CRDA_ERR_NUMERIC: return 3;
    case CRDA_ERR_IO: return 4;
    default: return 1;
  }
}

[[noreturn]] void die(crda_status st) {
  std::fprintf(stderr, "error: %s\n", crda_last_error());
  std::exit(exit_code(st));
}

[[noreturn]] void die_msg(int code, const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(code);
}

void check(crda_status st) {
  if (st != CRDA_OK) die(st);
}

// RAII holder for the opaque config handle.
struct Config {
  crda_config* handle = nullptr;
  Config() : handle(crda_config_new()) {
    if (!handle) die_msg(1, "out of memory");
  }
  ~Config() { crda_config_free(handle); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
};

struct GlobalOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  std::string out_dir;
};

void build_config(const Config& cfg, const GlobalOptions& opts) {
  if (!opts.config_path.empty()) {
    check(crda_config_load_file(cfg.handle, opts.config_path.c_str()));
  }
  for (const std::string& kv : opts.overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      die_msg(2, "--set expects section.key=value, got '" + kv + "'");
    }
    check(crda_config_set(cfg.handle, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (!opts.seed.empty()) {
    check(crda_config_set(cfg.handle, "engine.seed", opts.seed.c_str()));
  }
  if (!opts.out_dir.empty()) {
    check(crda_config_set_out_dir(cfg.handle, opts.out_dir.c_str()));
  }
  check(crda_config_validate(cfg.handle));
}

std::string config_value(const Config& cfg, const char* key) {
  char* raw = nullptr;
  check(crda_config_get(cfg.handle, key, &raw));
  std::string out(raw);
  crda_string_free(raw);
  return out;
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) die_msg(4, "cannot open input '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& s, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    die_msg(2, "invalid number '" + s + "' in " + context);
  }
  return v;
}

bool is_numeric(const std::string& s) {
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

// Data lines of a CSV body, with any non-numeric header row dropped.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (rows.empty() && !fields.empty() && !is_numeric(fields[0])) continue;  // header
    rows.push_back(std::move(fields));
  }
  return rows;
}

void print_summary(const crda_run_summary& s) {
  std::printf("epochs_run: %" PRId32 "\n", s.epochs_run);
  std::printf("final_val_auc: %.12f\n", s.final_val_auc);
  std::printf("final_shift_auc: %.12f\n", s.final_shift_auc);
  std::printf("final_train_ce: %.12f\n", s.final_train_ce);
}

int cmd_oracle_auc(const std::string& input) {
  const auto rows = csv_rows(read_input(input));
  if (rows.empty()) die_msg(2, "oracle auc: no data rows");
  std::vector<double> scores;
  std::vector<int32_t> labels;
  for (const auto& row : rows) {
    if (row.size() != 2) die_msg(2, "oracle auc: expected 'score,label' rows");
    scores.push_back(parse_number(row[0], "score column"));
    const double y = parse_number(row[1], "label column");
    labels.push_back(static_cast<int32_t>(y));
  }
  double auc = 0.0;
  check(crda_auc(scores.data(), labels.data(), scores.size(), &auc));
  std::printf("%.12f\n", auc);
  return 0;
}

int cmd_oracle_gae(const Config& cfg, const std::string& input) {
  const auto rows = csv_rows(read_input(input));
  if (rows.empty()) die_msg(2, "oracle gae: no data rows");
  std::vector<double> rewards;
  std::vector<double> values;
  bool have_bootstrap = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() == 1) {
      // A final single-value row is the bootstrap value.
      if (i + 1 != rows.size()) die_msg(2, "oracle gae: bootstrap row must come last");
      values.push_back(parse_number(row[0], "bootstrap row"));
      have_bootstrap = true;
    } else if (row.size() == 2) {
      rewards.push_back(parse_number(row[0], "reward column"));
      values.push_back(parse_number(row[1], "value column"));
    } else {
      die_msg(2, "oracle gae: expected 'reward,value' rows");
    }
  }
  if (!have_bootstrap) values.push_back(0.0);
  if (rewards.empty()) die_msg(2, "oracle gae: no (reward, value) rows");

  const double discount = parse_number(config_value(cfg, "ppo.discount"), "ppo.discount");
  const double lambda = parse_number(config_value(cfg, "ppo.gae_lambda"), "ppo.gae_lambda");
  std::vector<double> adv(rewards.size()), ret(rewards.size());
  check(crda_gae(rewards.data(), values.data(), rewards.size(), discount, lambda, adv.data(),
                 ret.data()));
  std::printf("t,advantage,return\n");
  for (size_t t = 0; t < rewards.size(); ++t) {
    std::printf("%zu,%.12f,%.12f\n", t, adv[t], ret[t]);
  }
  return 0;
}

int cmd_oracle_partition(const std::string& input) {
  const auto rows = csv_rows(read_input(input));
  std::vector<double> entropies;
  for (const auto& row : rows) {
    for (const std::string& field : row) {
      if (field.empty()) continue;
      entropies.push_back(parse_number(field, "entropy list"));
    }
  }
  if (entropies.empty()) die_msg(2, "oracle partition: no entropies");
  std::vector<int32_t> env(entropies.size());
  check(crda_partition(entropies.data(), entropies.size(), env.data()));
  const char* names[4] = {"dominant", "adv1", "adv2", "adv3"};
  for (int e = 0; e < 4; ++e) {
    std::printf("%s:", names[e]);
    for (size_t i = 0; i < env.size(); ++i) {
      if (env[i] == e) std::printf(" %zu", i);
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curriculum + RL data-augmentation training engine"};
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "config file path");
  app.add_option("--set", opts.overrides, "override, section.key=value (repeatable)");
  app.add_option("--seed", opts.seed, "RNG seed (u64)");
  app.add_option("--out", opts.out_dir, "output directory");

  CLI::App* train = app.add_subcommand("train", "run the full training loop");

  int preset = 0;
  CLI::App* ablate = app.add_subcommand("ablate", "run an ablation preset (1-5)");
  ablate->add_option("preset", preset, "1=all off, 2=+curriculum, 3=+RL, 4=+IRM, 5=all on")
      ->required();

  CLI::App* dump = app.add_subcommand("dump-schedules", "print the schedule CSV");

  std::string oracle_kind;
  std::string oracle_input = "-";
  CLI::App* oracle = app.add_subcommand("oracle", "reference computations over CSV input");
  oracle->add_option("kind", oracle_kind, "auc | gae | partition")->required();
  oracle->add_option("input", oracle_input, "input file (default stdin)");

  std::string checkpoint_path;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a .crda checkpoint");
  eval->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    Config cfg;
    if (train->parsed() || ablate->parsed() || dump->parsed() || eval->parsed() ||
        oracle_kind == "gae") {
      build_config(cfg, opts);
    }

    if (train->parsed()) {
      crda_run_summary summary{};
      check(crda_train(cfg.handle, &summary));
      print_summary(summary);
      return 0;
    }
    if (ablate->parsed()) {
      crda_run_summary summary{};
      check(crda_ablate(cfg.handle, preset, &summary));
      print_summary(summary);
      return 0;
    }
    if (dump->parsed()) {
      char* csv = nullptr;
      check(crda_schedules_csv(cfg.handle, &csv));
      std::fputs(csv, stdout);
      crda_string_free(csv);
      return 0;
    }
    if (eval->parsed()) {
      double val_auc = 0.0, shift_auc = 0.0;
      check(crda_eval_checkpoint(cfg.handle, checkpoint_path.c_str(), &val_auc, &shift_auc));
      std::printf("val_auc: %.12f\n", val_auc);
      std::printf("shift_auc: %.12f\n", shift_auc);
      return 0;
    }
    if (oracle->parsed()) {
      if (oracle_kind == "auc") return cmd_oracle_auc(oracle_input);
      if (oracle_kind == "gae") return cmd_oracle_gae(cfg, oracle_input);
      if (oracle_kind == "partition") return cmd_oracle_partition(oracle_input);
      die_msg(2, "unknown oracle kind '" + oracle_kind + "' (use auc, gae or partition)");
    }
  } catch (const std::exception& e) {
    die_msg(1, e.what());
  }
  return 0;
}
