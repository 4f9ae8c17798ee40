#include "engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "irm.hpp"
#include "rewards.hpp"
#include "schedules.hpp"

namespace crda {

TrainingState fresh_training_state(const TrainConfig& cfg) {
  const uint64_t seed = cfg.engine.seed;
  TrainingState state;
  Rng det_rng = Rng::stream(seed, "init_detector");
  state.detector = detector_init(cfg.task.feature_dim(), cfg.engine.detector_hidden,
                                 cfg.engine.latent_dim, det_rng);
  state.detector_opt = adam_init(state.detector.params.size(), cfg.engine.detector_lr,
                                 cfg.engine.detector_weight_decay);
  Rng pol_rng = Rng::stream(seed, "init_policy");
  state.policy = policy_init(cfg.engine.latent_dim, cfg.engine.policy_hidden, pol_rng);
  state.policy_opt = adam_init(state.policy.params.size(), cfg.ppo.lr, 0.0);
  Rng cri_rng = Rng::stream(seed, "init_critic");
  state.critic = critic_init(cfg.engine.latent_dim, cfg.engine.critic_hidden, cri_rng);
  state.critic_opt = adam_init(state.critic.params.size(), cfg.ppo.lr, 0.0);
  state.queues = EnvironmentQueues(static_cast<size_t>(cfg.engine.batch_size));
  state.data_rng = Rng::stream(seed, "data");
  state.action_rng = Rng::stream(seed, "action");
  state.region_rng = Rng::stream(seed, "region");
  state.state_rng = Rng::stream(seed, "state0");
  return state;
}

EvalResult evaluate(const Detector& det, const SampleSet& dataset) {
  const BatchForward fwd = batch_forward(det, dataset);
  std::vector<int> labels;
  labels.reserve(dataset.size());
  for (const SyntheticSample& s : dataset) labels.push_back(s.label);
  EvalResult out;
  out.auc = roc_auc(fwd.probs, labels);
  out.mean_ce = ce_loss(fwd.probs, labels);
  return out;
}

void apply_ablation_preset(TrainConfig& cfg, int preset) {
  switch (preset) {
    case 1: cfg.engine.no_rl = true; cfg.engine.no_irm = true; cfg.engine.no_curriculum = true; break;
    case 2: cfg.engine.no_rl = true; cfg.engine.no_irm = true; cfg.engine.no_curriculum = false; break;
    case 3: cfg.engine.no_rl = false; cfg.engine.no_irm = true; cfg.engine.no_curriculum = false; break;
    case 4: cfg.engine.no_rl = true; cfg.engine.no_irm = false; cfg.engine.no_curriculum = false; break;
    case 5: cfg.engine.no_rl = false; cfg.engine.no_irm = false; cfg.engine.no_curriculum = false; break;
    default: throw ConfigError("ablation preset must lie in 1..5");
  }
}

namespace {

const Region& full_face_region(const RegionPool& pool) {
  for (const Region& r : pool.regions) {
    if (r.organ_mask == 0xF) return r;
  }
  throw NumericError("region pool is missing the full-face region");
}

std::vector<int> batch_labels(const SampleSet& batch) {
  std::vector<int> labels;
  labels.reserve(batch.size());
  for (const SyntheticSample& s : batch) labels.push_back(s.label);
  return labels;
}

// Like evaluate(), but a split that degenerates to a single class scores
// chance AUC with a warning instead of aborting the run.
EvalResult evaluate_or_chance(const Detector& det, const SampleSet& dataset, const char* what) {
  const BatchForward fwd = batch_forward(det, dataset);
  const std::vector<int> labels = batch_labels(dataset);
  size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<size_t>(y);
  EvalResult out;
  out.mean_ce = ce_loss(fwd.probs, labels);
  if (n_pos == 0 || n_pos == labels.size()) {
    std::fprintf(stderr, "warning: %s split has a single class; reporting chance AUC 0.5\n", what);
    out.auc = 0.5;
  } else {
    out.auc = roc_auc(fwd.probs, labels);
  }
  return out;
}

struct EpochSchedule {
  double q = 0.5;
  double beta = 0.0;
  double area_raw = 1.0;
  double area = 1.0;
  RewardWeights lambda;
  bool fixed_region = false;  // no_curriculum trains on the full face only
};

EpochSchedule epoch_schedule(const TrainConfig& cfg, int epoch) {
  EpochSchedule s;
  if (cfg.engine.no_curriculum) {
    s.q = 0.5;
    s.beta = 0.5 * cfg.curriculum.beta_max;
    s.area_raw = cfg.curriculum.area_full;
    s.area = std::min(cfg.curriculum.area_full, 1.0);
    s.lambda.lambda = cfg.rewards.early;  // the initial weights, held fixed
    s.fixed_region = true;
    return s;
  }
  const double t = static_cast<double>(epoch);
  s.q = data_proportion(t, cfg.curriculum);
  s.beta = exploration_coef(t, cfg.curriculum);
  s.area_raw = target_area_raw(t, cfg.curriculum);
  s.area = target_area(t, cfg.curriculum);
  s.lambda = lambda_schedule(cfg.rewards, t, static_cast<double>(cfg.engine.epochs));
  return s;
}

}  // namespace

RunReport run_training(const TrainConfig& cfg, TrainingState& state) {
  namespace fs = std::filesystem;
  const EngineConfig& eng = cfg.engine;
  const fs::path out_dir(eng.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + eng.out_dir + "'");

  const std::string metrics_path = (out_dir / "metrics.jsonl").string();
  const std::string timing_path = (out_dir / "timing.jsonl").string();
  write_file((out_dir / "effective_config").string(), serialize_config(cfg));
  if (state.next_epoch == 0) {
    write_file(metrics_path, "");
    write_file(timing_path, "");
  }

  const RegionPool pool = build_region_pool(cfg.curriculum.organ_areas, cfg.curriculum.area_full);
  const Region& full_face = full_face_region(pool);

  Rng val_rng = Rng::stream(eng.seed, "valset");
  const SampleSet val_set = make_validation_set(cfg.task, eng.val_size, full_face, val_rng);
  Rng shift_rng = Rng::stream(eng.seed, "shiftset");
  const SampleSet shift_set = spurious_shift_set(cfg.task, eng.shift_size, full_face, shift_rng);
  if (eng.export_datasets) {
    write_samples_csv(val_set, (out_dir / "val_set.csv").string());
    write_samples_csv(shift_set, (out_dir / "shift_set.csv").string());
  }

  const int batch_size = eng.batch_size;
  const int batches = eng.batches_per_epoch;
  const double gamma_eff = eng.no_irm ? 0.0 : cfg.irm.gamma;
  const double uniform_logprob = -std::log(static_cast<double>(kNumOps));

  RunReport report;
  MetricsRecord last_record;
  double total_wall_ms = 0.0;

  std::vector<double> ce_grad(state.detector.params.size());
  std::vector<double> bias_grad(state.detector.params.size());
  std::vector<double> entropies(static_cast<size_t>(batch_size));

  for (int epoch = state.next_epoch; epoch < eng.epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    try {
      const EpochSchedule sched = epoch_schedule(cfg, epoch);

      Trajectory traj;
      std::vector<double> step_stability, step_adversarial, step_kl;
      std::vector<double> s = initial_state(eng.latent_dim, state.state_rng);
      ActionDistribution prev_dist;
      bool have_prev_dist = false;
      double ce_sum = 0.0, bias_sum = 0.0, entropy_sum = 0.0;
      std::array<double, kNumEnvironments> env_weights{};

      for (int b = 0; b < batches; ++b) {
        const Region& region =
            sched.fixed_region ? full_face
                               : sample_region(pool, sched.area, cfg.curriculum.region_sigma,
                                               state.region_rng);

        const ActionDistribution dist = policy_forward(state.policy, s);
        int action;
        double logprob;
        if (eng.no_rl) {
          action = static_cast<int>(state.action_rng.uniform_int(kNumOps));
          logprob = uniform_logprob;
        } else {
          const SampledAction sa = sample_action(dist, state.action_rng);
          action = sa.action;
          logprob = sa.logprob;
        }

        const TrainBatch batch =
            make_train_batch(cfg.task, sched.q, region, action, batch_size, state.data_rng);
        const BatchForward fwd = batch_forward(state.detector, batch.samples);
        const std::vector<int> labels = batch_labels(batch.samples);

        for (size_t i = 0; i < batch.samples.size(); ++i) {
          const ActionDistribution di =
              policy_forward(state.policy, normalize_state(fwd.caches[i].y));
          entropies[i] = action_entropy(di);
          entropy_sum += entropies[i];
        }
        const Partition part = partition_by_entropy(entropies);
        for (int env = 0; env < kNumEnvironments; ++env) {
          for (size_t idx : part.members[static_cast<size_t>(env)]) {
            state.queues.push(env, batch.samples[idx], entropies[idx]);
          }
        }
        env_weights = environment_weights(state.queues, state.policy, state.detector);
        const BiasLossReport bias = bias_loss(state.detector, state.queues, env_weights, cfg.irm);

        // Rewards use the pre-update detector.
        step_stability.push_back(training_stability(fwd.probs, labels));
        step_adversarial.push_back(
            adversarial_deception(state.detector, dist, batch.base_reals, region, cfg.task));
        step_kl.push_back(have_prev_dist ? kl_divergence(dist, prev_dist) : 0.0);

        std::fill(ce_grad.begin(), ce_grad.end(), 0.0);
        const double n = static_cast<double>(batch.samples.size());
        std::vector<double> dlogit(batch.samples.size());
        for (size_t i = 0; i < batch.samples.size(); ++i) {
          dlogit[i] = (fwd.probs[i] - static_cast<double>(labels[i])) / n;
        }
        backward_from_dlogit(state.detector, fwd, dlogit, ce_grad);
        if (gamma_eff > 0.0) {
          std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
          bias_loss_backward(state.detector, state.queues, env_weights, cfg.irm, bias_grad);
          for (size_t i = 0; i < ce_grad.size(); ++i) ce_grad[i] += gamma_eff * bias_grad[i];
        }

        traj.states.push_back(s);
        traj.actions.push_back(action);
        traj.old_logprobs.push_back(logprob);
        traj.values.push_back(critic_forward(state.critic, s));

        adam_step(state.detector_opt, state.detector.params, ce_grad);

        s = update_state(state.detector, batch.samples);
        prev_dist = dist;
        have_prev_dist = true;
        ce_sum += ce_loss(fwd.probs, labels);
        bias_sum += bias.value;
      }
      traj.values.push_back(critic_forward(state.critic, s));

      const EvalResult val = evaluate_or_chance(state.detector, val_set, "validation");
      const double dauc = delta_auc(val.auc, state.prev_val_auc);

      traj.rewards.resize(static_cast<size_t>(batches));
      double stab_sum = 0.0, adv_sum = 0.0, kl_sum = 0.0;
      for (int b = 0; b < batches; ++b) {
        const RewardBreakdown r =
            total_reward(step_stability[static_cast<size_t>(b)], dauc,
                         step_adversarial[static_cast<size_t>(b)],
                         step_kl[static_cast<size_t>(b)], sched.lambda);
        traj.rewards[static_cast<size_t>(b)] = r.total;
        stab_sum += r.stability;
        adv_sum += r.adversarial;
        kl_sum += r.kl;
      }
      if (traj.length() != static_cast<size_t>(batches)) {
        throw NumericError("trajectory length diverged from batches_per_epoch");
      }

      if (!eng.no_rl) {
        ppo_update(state.policy, state.policy_opt, state.critic, state.critic_opt, traj,
                   cfg.ppo, sched.beta);
      }

      const EvalResult shift = evaluate_or_chance(state.detector, shift_set, "shift");
      state.prev_val_auc = val.auc;

      MetricsRecord rec;
      rec.epoch = epoch;
      rec.train_ce = ce_sum / batches;
      rec.bias_loss = bias_sum / batches;
      rec.reward = total_reward(stab_sum / batches, dauc, adv_sum / batches,
                                kl_sum / batches, sched.lambda);
      rec.val_auc = val.auc;
      rec.val_ce = val.mean_ce;
      rec.shift_auc = shift.auc;
      rec.q = sched.q;
      rec.beta = sched.beta;
      rec.area_raw = sched.area_raw;
      rec.area = sched.area;
      rec.env_weights = env_weights;
      rec.policy_entropy_mean = entropy_sum / (static_cast<double>(batches) * batch_size);
      const auto wall_end = std::chrono::steady_clock::now();
      rec.wall_ms =
          std::chrono::duration<double, std::milli>(wall_end - wall_start).count();
      rec.check_finite();
      append_line(metrics_path, metrics_json_line(rec));
      append_line(timing_path, timing_json_line(epoch, rec.wall_ms));

      last_record = rec;
      total_wall_ms += rec.wall_ms;
      state.next_epoch = epoch + 1;
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")");
    }

    if (eng.checkpoint_every > 0 && state.next_epoch % eng.checkpoint_every == 0 &&
        state.next_epoch < eng.epochs) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%04d.crda", state.next_epoch);
      save_checkpoint((out_dir / name).string(), state, cfg);
    }
    if (eng.halt_after_epoch >= 0 && epoch >= eng.halt_after_epoch) break;
  }

  const std::string checkpoint_path = (out_dir / "final.crda").string();
  save_checkpoint(checkpoint_path, state, cfg);

  report.epochs_run = state.next_epoch;
  report.final_val_auc = last_record.val_auc;
  report.final_shift_auc = last_record.shift_auc;
  report.final_train_ce = last_record.train_ce;
  report.wall_ms = total_wall_ms;
  report.metrics_path = metrics_path;
  report.checkpoint_path = checkpoint_path;
  report.summary_path = (out_dir / "summary.json").string();
  write_file(report.summary_path, summary_json(report));
  return report;
}

RunReport run_training(const TrainConfig& cfg) {
  TrainingState state = cfg.engine.resume_from.empty()
                            ? fresh_training_state(cfg)
                            : load_checkpoint(cfg.engine.resume_from, cfg);
  return run_training(cfg, state);
}

}  // namespace crda
