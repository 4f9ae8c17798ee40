#pragma once

#include <vector>

#include "nn.hpp"
#include "policy.hpp"
#include "rng.hpp"

namespace crda {

struct PpoConfig {
  double clip = 0.2;
  int update_epochs = 4;
  double lr = 3e-5;
  double gae_lambda = 0.8;
  double discount = 0.95;
  double max_grad_norm = 1.0;
  double value_coef = 0.5;

  void validate() const;
};

// Value baseline: state -> scalar, same 2-layer shape as the policy.
struct Critic {
  int state_dim = 32;
  int hidden = 64;
  std::vector<double> params;

  Mlp2Dims dims() const { return Mlp2Dims{state_dim, hidden, 1, false}; }
};

Critic critic_init(int state_dim, int hidden, Rng& rng);
double critic_forward(const Critic& critic, const std::vector<double>& state);

struct Trajectory {
  std::vector<std::vector<double>> states;  // T entries
  std::vector<int> actions;                 // T
  std::vector<double> old_logprobs;         // T, recorded at collection time
  std::vector<double> rewards;              // T
  std::vector<double> values;               // T+1, last entry bootstraps

  size_t length() const { return rewards.size(); }
  void validate() const;
};

struct GaeResult {
  std::vector<double> raw_advantages;  // double-loop discounted deltas
  std::vector<double> advantages;      // normalized to zero mean / unit variance when T > 1
  std::vector<double> returns;         // raw advantage + value
};

GaeResult compute_gae(const Trajectory& traj, double discount, double gae_lambda);

struct PpoStats {
  double mean_ratio = 1.0;
  double clip_fraction = 0.0;
  double kl_old_new = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

// Minimized policy objective for one pass over the trajectory:
//   -( sum_t min(rho_t A_t, clip(rho_t, 1 +- clip) A_t) + entropy_coef * H_t ) / T
// with rho_t the importance ratio against traj.old_logprobs. When grad is
// non-null the parameter gradient accumulates into it; entropy_out (optional)
// receives the mean entropy.
double ppo_policy_objective(const Policy& policy, const Trajectory& traj,
                            const std::vector<double>& advantages, double clip,
                            double entropy_coef, std::vector<double>* grad,
                            double* entropy_out = nullptr);

// Minimized critic objective value_coef * mean_t (V(s_t) - return_t)^2, with
// optional accumulated gradient.
double critic_objective(const Critic& critic, const Trajectory& traj,
                        const std::vector<double>& returns, double value_coef,
                        std::vector<double>* grad);

// PPO-Clip: for update_epochs passes over the trajectory, ascends
//   E[min(rho * A, clip(rho, 1-eps, 1+eps) * A)] + entropy_coef * H(pi) - value loss,
// with per-network gradient clipping and Adam. Both optimizer states persist
// across calls (one call per engine epoch).
PpoStats ppo_update(Policy& policy, AdamState& policy_opt, Critic& critic,
                    AdamState& critic_opt, const Trajectory& traj, const PpoConfig& cfg,
                    double entropy_coef);

}  // namespace crda
