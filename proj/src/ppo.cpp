#include "ppo.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace crda {

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("ppo clip must lie in (0, 1)");
  if (update_epochs < 1) throw ConfigError("ppo update_epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("ppo lr must be positive");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("ppo discount must lie in (0, 1]");
  if (!(max_grad_norm > 0.0)) throw ConfigError("ppo max_grad_norm must be positive");
  if (!(value_coef >= 0.0)) throw ConfigError("ppo value_coef must be >= 0");
}

Critic critic_init(int state_dim, int hidden, Rng& rng) {
  if (state_dim < 1 || hidden < 1) throw ConfigError("critic dimensions must be positive");
  Critic c;
  c.state_dim = state_dim;
  c.hidden = hidden;
  c.params = mlp2_init(c.dims(), rng);
  return c;
}

double critic_forward(const Critic& critic, const std::vector<double>& state) {
  if (static_cast<int>(state.size()) != critic.state_dim) {
    throw NumericError("critic state dimension mismatch");
  }
  Mlp2Cache cache;
  mlp2_forward(critic.dims(), critic.params, state.data(), cache);
  return cache.y[0];
}

void Trajectory::validate() const {
  const size_t t = rewards.size();
  if (t == 0) throw NumericError("trajectory is empty");
  if (states.size() != t || actions.size() != t || old_logprobs.size() != t) {
    throw NumericError("trajectory sequences have mismatched lengths");
  }
  if (values.size() != t + 1) throw NumericError("trajectory values must have length T+1");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw NumericError("non-finite trajectory reward");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite trajectory value");
  }
}

GaeResult compute_gae(const Trajectory& traj, double discount, double gae_lambda) {
  traj.validate();
  const size_t t_len = traj.length();
  GaeResult out;
  out.raw_advantages.resize(t_len);
  out.returns.resize(t_len);

  double acc = 0.0;
  for (size_t t = t_len; t-- > 0;) {
    const double delta =
        traj.rewards[t] + discount * traj.values[t + 1] - traj.values[t];
    acc = delta + discount * gae_lambda * acc;
    out.raw_advantages[t] = acc;
    out.returns[t] = acc + traj.values[t];
  }

  out.advantages = out.raw_advantages;
  if (t_len > 1) {
    double mean = 0.0;
    for (double a : out.advantages) mean += a;
    mean /= static_cast<double>(t_len);
    double var = 0.0;
    for (double a : out.advantages) var += (a - mean) * (a - mean);
    var /= static_cast<double>(t_len);
    const double scale = std::sqrt(var) + 1e-8;
    for (double& a : out.advantages) a = (a - mean) / scale;
  }
  return out;
}

namespace {

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("ppo update diverged in ") + term);
  }
}

}  // namespace

double ppo_policy_objective(const Policy& policy, const Trajectory& traj,
                            const std::vector<double>& advantages, double clip,
                            double entropy_coef, std::vector<double>* grad,
                            double* entropy_out) {
  const size_t t_len = traj.length();
  if (advantages.size() != t_len) {
    throw NumericError("ppo objective needs one advantage per step");
  }
  const double inv_t = 1.0 / static_cast<double>(t_len);
  std::vector<double> dy(static_cast<size_t>(kNumOps));
  Mlp2Cache cache;
  double surrogate_sum = 0.0, entropy_sum = 0.0;

  for (size_t t = 0; t < t_len; ++t) {
    const int a = traj.actions[t];
    if (a < 0 || a >= kNumOps) throw NumericError("trajectory action out of range");
    const ActionDistribution dist = policy_forward_cached(policy, traj.states[t], cache);
    const double ratio = std::exp(std::log(dist.probs[a]) - traj.old_logprobs[t]);
    const double adv = advantages[t];
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    const double unclipped = ratio * adv;
    const double clipped = clipped_ratio * adv;
    surrogate_sum += std::min(unclipped, clipped);
    const double h = action_entropy(dist);
    entropy_sum += h;
    if (grad == nullptr) continue;

    // d/dlogits of -(surrogate + entropy_coef * entropy) / T. The clipped
    // branch has zero gradient whenever it is the strict minimum.
    const double surr_coef = unclipped <= clipped ? ratio * adv : 0.0;
    for (int j = 0; j < kNumOps; ++j) {
      const double p = dist.probs[j];
      const double dsurr = surr_coef * ((j == a ? 1.0 : 0.0) - p);
      const double dentropy = -p * (std::log(p) + h);
      dy[static_cast<size_t>(j)] = -(dsurr + entropy_coef * dentropy) * inv_t;
    }
    mlp2_backward(policy.dims(), policy.params, cache, dy.data(), *grad);
  }

  if (entropy_out != nullptr) *entropy_out = entropy_sum * inv_t;
  return -(surrogate_sum + entropy_coef * entropy_sum) * inv_t;
}

double critic_objective(const Critic& critic, const Trajectory& traj,
                        const std::vector<double>& returns, double value_coef,
                        std::vector<double>* grad) {
  const size_t t_len = traj.length();
  if (returns.size() != t_len) {
    throw NumericError("critic objective needs one return per step");
  }
  const double inv_t = 1.0 / static_cast<double>(t_len);
  std::vector<double> dv(1);
  Mlp2Cache cache;
  double value_sq_sum = 0.0;

  for (size_t t = 0; t < t_len; ++t) {
    mlp2_forward(critic.dims(), critic.params, traj.states[t].data(), cache);
    const double err = cache.y[0] - returns[t];
    value_sq_sum += err * err;
    if (grad == nullptr) continue;
    dv[0] = value_coef * 2.0 * err * inv_t;
    mlp2_backward(critic.dims(), critic.params, cache, dv.data(), *grad);
  }
  return value_coef * value_sq_sum * inv_t;
}

PpoStats ppo_update(Policy& policy, AdamState& policy_opt, Critic& critic,
                    AdamState& critic_opt, const Trajectory& traj, const PpoConfig& cfg,
                    double entropy_coef) {
  cfg.validate();
  const GaeResult gae = compute_gae(traj, cfg.discount, cfg.gae_lambda);
  const size_t t_len = traj.length();
  const double inv_t = 1.0 / static_cast<double>(t_len);
  const Policy old_policy = policy;  // snapshot for the KL(old || new) statistic

  PpoStats stats;
  std::vector<double> policy_grad(policy.params.size());
  std::vector<double> critic_grad(critic.params.size());

  for (int pass = 0; pass < cfg.update_epochs; ++pass) {
    std::fill(policy_grad.begin(), policy_grad.end(), 0.0);
    std::fill(critic_grad.begin(), critic_grad.end(), 0.0);

    const double policy_obj = ppo_policy_objective(policy, traj, gae.advantages, cfg.clip,
                                                   entropy_coef, &policy_grad, &stats.entropy);
    stats.value_loss = critic_objective(critic, traj, gae.returns, cfg.value_coef, &critic_grad);
    stats.policy_loss = policy_obj + entropy_coef * stats.entropy;
    check_finite(stats.policy_loss, "the clipped surrogate");
    check_finite(stats.entropy, "the entropy bonus");
    check_finite(stats.value_loss, "the value loss");

    clip_grad_norm(policy_grad, cfg.max_grad_norm);
    clip_grad_norm(critic_grad, cfg.max_grad_norm);
    adam_step(policy_opt, policy.params, policy_grad);
    adam_step(critic_opt, critic.params, critic_grad);
  }

  double ratio_sum = 0.0, kl_sum = 0.0;
  size_t clipped_count = 0;
  for (size_t t = 0; t < t_len; ++t) {
    const ActionDistribution new_dist = policy_forward(policy, traj.states[t]);
    const ActionDistribution old_dist = policy_forward(old_policy, traj.states[t]);
    const double ratio =
        std::exp(std::log(new_dist.probs[traj.actions[t]]) - traj.old_logprobs[t]);
    ratio_sum += ratio;
    if (std::abs(ratio - 1.0) > cfg.clip) ++clipped_count;
    kl_sum += kl_divergence(old_dist, new_dist);
  }
  stats.mean_ratio = ratio_sum * inv_t;
  stats.clip_fraction = static_cast<double>(clipped_count) * inv_t;
  stats.kl_old_new = kl_sum * inv_t;
  check_finite(stats.kl_old_new, "the old/new KL statistic");
  return stats;
}

}  // namespace crda
