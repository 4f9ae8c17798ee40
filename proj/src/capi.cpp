#include "crda/crda.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "environments.hpp"
#include "errors.hpp"
#include "ppo.hpp"
#include "rewards.hpp"
#include "schedules.hpp"

namespace {

thread_local std::string g_last_error = "ok";

crda_status fail(crda_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Funnels C++ exceptions into status codes at the ABI boundary.
template <typename Fn>
crda_status guarded(Fn&& fn) {
  try {
    fn();
    return CRDA_OK;
  } catch (const crda::ConfigError& e) {
    return fail(CRDA_ERR_CONFIG, e.what());
  } catch (const crda::NumericError& e) {
    return fail(CRDA_ERR_NUMERIC, e.what());
  } catch (const crda::IoError& e) {
    return fail(CRDA_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CRDA_ERR_NUMERIC, "out of memory");
  } catch (const std::exception& e) {
    return fail(CRDA_ERR_INVALID, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_summary(crda_run_summary* summary, const crda::RunReport& report) {
  if (!summary) return;
  summary->epochs_run = report.epochs_run;
  summary->final_val_auc = report.final_val_auc;
  summary->final_shift_auc = report.final_shift_auc;
  summary->final_train_ce = report.final_train_ce;
  summary->wall_ms = report.wall_ms;
}

}  // namespace

struct crda_config {
  crda::TrainConfig cfg;
};

extern "C" {

const char* crda_last_error(void) { return g_last_error.c_str(); }

crda_config* crda_config_new(void) { return new (std::nothrow) crda_config(); }

void crda_config_free(crda_config* cfg) { delete cfg; }

crda_status crda_config_load_file(crda_config* cfg, const char* path) {
  if (!cfg || !path) return fail(CRDA_ERR_INVALID, "null argument to crda_config_load_file");
  return guarded([&] { cfg->cfg = crda::load_config_file(path); });
}

crda_status crda_config_set(crda_config* cfg, const char* dotted_key, const char* value) {
  if (!cfg || !dotted_key || !value) {
    return fail(CRDA_ERR_INVALID, "null argument to crda_config_set");
  }
  return guarded([&] { crda::apply_override(cfg->cfg, dotted_key, value); });
}

crda_status crda_config_set_seed(crda_config* cfg, uint64_t seed) {
  if (!cfg) return fail(CRDA_ERR_INVALID, "null config");
  cfg->cfg.engine.seed = seed;
  return CRDA_OK;
}

crda_status crda_config_set_out_dir(crda_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(CRDA_ERR_INVALID, "null argument to crda_config_set_out_dir");
  cfg->cfg.engine.out_dir = dir;
  return CRDA_OK;
}

crda_status crda_config_validate(crda_config* cfg) {
  if (!cfg) return fail(CRDA_ERR_INVALID, "null config");
  return guarded([&] { cfg->cfg.finalize(); });
}

crda_status crda_config_serialize(const crda_config* cfg, char** out) {
  if (!cfg || !out) return fail(CRDA_ERR_INVALID, "null argument to crda_config_serialize");
  return guarded([&] { *out = copy_string(crda::serialize_config(cfg->cfg)); });
}

crda_status crda_config_get(const crda_config* cfg, const char* dotted_key, char** out) {
  if (!cfg || !dotted_key || !out) {
    return fail(CRDA_ERR_INVALID, "null argument to crda_config_get");
  }
  return guarded([&] { *out = copy_string(crda::get_config_value(cfg->cfg, dotted_key)); });
}

void crda_string_free(char* s) { delete[] s; }

crda_status crda_train(const crda_config* cfg, crda_run_summary* summary) {
  if (!cfg) return fail(CRDA_ERR_INVALID, "null config");
  return guarded([&] {
    crda::TrainConfig local = cfg->cfg;
    local.finalize();
    fill_summary(summary, crda::run_training(local));
  });
}

crda_status crda_ablate(const crda_config* cfg, int preset, crda_run_summary* summary) {
  if (!cfg) return fail(CRDA_ERR_INVALID, "null config");
  return guarded([&] {
    crda::TrainConfig local = cfg->cfg;
    crda::apply_ablation_preset(local, preset);
    local.engine.out_dir =
        (std::filesystem::path(local.engine.out_dir) / ("ablate_" + std::to_string(preset)))
            .string();
    local.finalize();
    fill_summary(summary, crda::run_training(local));
  });
}

crda_status crda_eval_checkpoint(const crda_config* cfg, const char* path, double* val_auc,
                                 double* shift_auc) {
  if (!cfg || !path || !val_auc || !shift_auc) {
    return fail(CRDA_ERR_INVALID, "null argument to crda_eval_checkpoint");
  }
  return guarded([&] {
    crda::TrainConfig local = cfg->cfg;
    local.finalize();
    const crda::TrainingState state = crda::load_checkpoint(path, local);
    const crda::RegionPool pool =
        crda::build_region_pool(local.curriculum.organ_areas, local.curriculum.area_full);
    const crda::Region* full_face = nullptr;
    for (const crda::Region& r : pool.regions) {
      if (r.organ_mask == 0xF) full_face = &r;
    }
    crda::Rng val_rng = crda::Rng::stream(local.engine.seed, "valset");
    const crda::SampleSet val_set =
        crda::make_validation_set(local.task, local.engine.val_size, *full_face, val_rng);
    crda::Rng shift_rng = crda::Rng::stream(local.engine.seed, "shiftset");
    const crda::SampleSet shift_set =
        crda::spurious_shift_set(local.task, local.engine.shift_size, *full_face, shift_rng);
    *val_auc = crda::evaluate(state.detector, val_set).auc;
    *shift_auc = crda::evaluate(state.detector, shift_set).auc;
  });
}

crda_status crda_schedules_csv(const crda_config* cfg, char** out) {
  if (!cfg || !out) return fail(CRDA_ERR_INVALID, "null argument to crda_schedules_csv");
  return guarded([&] {
    crda::TrainConfig local = cfg->cfg;
    local.finalize();
    *out = copy_string(crda::schedules_csv(local.curriculum));
  });
}

crda_status crda_auc(const double* scores, const int32_t* labels, size_t n, double* out) {
  if (!scores || !labels || !out) return fail(CRDA_ERR_INVALID, "null argument to crda_auc");
  return guarded([&] {
    std::vector<double> s(scores, scores + n);
    std::vector<int> y(labels, labels + n);
    *out = crda::roc_auc(s, y);
  });
}

crda_status crda_gae(const double* rewards, const double* values, size_t n, double discount,
                     double gae_lambda, double* out_advantages, double* out_returns) {
  if (!rewards || !values || !out_advantages || !out_returns) {
    return fail(CRDA_ERR_INVALID, "null argument to crda_gae");
  }
  return guarded([&] {
    crda::Trajectory traj;
    traj.rewards.assign(rewards, rewards + n);
    traj.values.assign(values, values + n + 1);
    traj.states.resize(n);
    traj.actions.assign(n, 0);
    traj.old_logprobs.assign(n, 0.0);
    const crda::GaeResult gae = crda::compute_gae(traj, discount, gae_lambda);
    for (size_t i = 0; i < n; ++i) {
      out_advantages[i] = gae.raw_advantages[i];
      out_returns[i] = gae.returns[i];
    }
  });
}

crda_status crda_partition(const double* entropies, size_t n, int32_t* out_env) {
  if (!entropies || !out_env) return fail(CRDA_ERR_INVALID, "null argument to crda_partition");
  return guarded([&] {
    std::vector<double> h(entropies, entropies + n);
    const crda::Partition part = crda::partition_by_entropy(h);
    for (int env = 0; env < crda::kNumEnvironments; ++env) {
      for (size_t idx : part.members[static_cast<size_t>(env)]) {
        out_env[idx] = env;
      }
    }
  });
}

}  // extern "C"
