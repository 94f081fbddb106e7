/*
 Copyright 2026

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "rvd/env.hpp"
#include "rvd/policy.hpp"

namespace rvd {

/// PPO hyperparameters. gamma, learning_rate, minibatch_size and
/// total_steps follow the published defaults for this task; the remaining
/// fields are conventional PPO reference-implementation values, all
/// overridable from the "ppo" object of a JSON config.
struct PpoConfig {
    double gamma = 0.999;
    double learning_rate = 5e-5;
    int minibatch_size = 64;
    long long total_steps = 25'000'000;
    double gae_lambda = 0.95;
    double clip_epsilon = 0.2;
    int epochs_per_update = 10;
    int rollout_horizon = 2048;  // per env
    double value_coef = 0.5;
    double entropy_coef = 0.0;
    int n_envs = 8;
    double grad_clip_norm = 0.5;
    bool normalize_advantages = true;
    int checkpoint_every_updates = 10;

    void validate() const;  // throws ConfigError
};

/// One curriculum stage: scaled docking tolerances and noise settings, plus
/// the promotion rule (trailing-window success rate). A stage with a
/// promotion threshold > 1 never promotes.
struct CurriculumStage {
    double tolerance_scale = 1.0;
    double alpha = 0.0;
    bool actuation_noise = true;
    double promotion_success_rate = 0.8;
    int promotion_window = 100;

    StageSettings settings() const { return {tolerance_scale, alpha, actuation_noise}; }
};

using CurriculumSchedule = std::vector<CurriculumStage>;

/// The standard 4-stage schedule: discover the task with tolerances x100
/// and no noise, then tighten to x10 with actuation noise, then nominal
/// tolerances, then nominal tolerances with the target navigation noise.
CurriculumSchedule default_curriculum(double target_alpha);

/// Non-empty, tolerance_scale non-increasing, sane ranges.
void validate_curriculum(const CurriculumSchedule& schedule);

/// Flat transition storage for one update: column index t * n_envs + i.
/// Actions are the pre-clip Gaussian samples (the env clips on entry), so
/// importance ratios stay exact across epochs.
struct RolloutBuffer {
    int horizon = 0;
    int n_envs = 0;
    Eigen::MatrixXd obs;         // 7 x size
    Eigen::MatrixXd actions;     // 3 x size
    Eigen::VectorXd log_probs;   // size
    Eigen::VectorXd rewards;     // size
    Eigen::VectorXd values;      // size
    Eigen::VectorXd dones;       // size, 0/1 episode-boundary markers
    Eigen::VectorXd advantages;  // size, filled by compute_gae
    Eigen::VectorXd returns;     // size, advantage + value
    Eigen::VectorXd last_values; // n_envs, bootstrap for the horizon tail

    int size() const { return horizon * n_envs; }
    int index(int t, int env) const { return t * n_envs + env; }
    void allocate(int horizon_steps, int envs);
};

/// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t)
/// A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
/// returns = A + V. The tail bootstraps from last_values.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda);

/// In-place whole-buffer advantage standardization (mean 0, std 1).
void normalize_advantages(RolloutBuffer& buffer);

struct EpisodeStats {
    OutcomeKind kind = OutcomeKind::Timeout;
    double episode_return = 0.0;
    int length = 0;
    double elapsed_s = 0.0;
    double propellant_kg = 0.0;
    bool success() const { return kind == OutcomeKind::DockSuccess; }
};

struct CollectResult {
    RolloutBuffer buffer;
    std::vector<EpisodeStats> episodes;  // completed during collection
};

/// Drive the vectorized envs for `horizon` steps each, sampling actions per
/// env from its own RNG stream. Episodes ending in Timeout get
/// gamma * V(terminal observation) folded into that step's stored reward
/// (the horizon is an artifact of the MDP, not a real terminal), so
/// compute_gae can treat every done flag uniformly.
CollectResult collect_rollouts(const MlpParams& params,
                               std::vector<Environment>& envs,
                               std::vector<Rng>& samplers,
                               std::vector<Observation>& current_obs,
                               int horizon, double gamma);

/// Adam moments; tensor shapes mirror the parameters.
struct AdamState {
    MlpGrads m;
    MlpGrads v;
    long long t = 0;

    static AdamState zeros();
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step_inplace(MlpParams& params, const MlpGrads& grads, AdamState& state,
                       double lr);

/// Pure variant of the same update.
std::pair<MlpParams, AdamState> adam_step(const MlpParams& params,
                                          const MlpGrads& grads,
                                          const AdamState& state, double lr);

struct UpdateDiagnostics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_fraction = 0.0;
    double grad_norm = 0.0;  // mean pre-clip global norm
};

/// Clipped-surrogate PPO update over shuffled minibatches:
/// maximize min(ratio*A, clip(ratio, 1-eps, 1+eps)*A)
///          - value_coef*(V - return)^2 + entropy_coef*H,
/// via Adam with global gradient-norm clipping. Advantages must already be
/// computed (and normalized if desired). Throws NumericError on a
/// non-finite loss, naming the offending minibatch.
UpdateDiagnostics ppo_update(MlpParams& params, AdamState& adam,
                             const RolloutBuffer& buffer, const PpoConfig& cfg,
                             Rng& shuffle_rng);

/// Full training loop: collect -> GAE -> update, with curriculum promotion
/// on the trailing-window success rate, JSON-lines metrics, and exact-resume
/// checkpoints. All state is derived from one root seed; two runs with the
/// same seed and config produce byte-identical metrics logs.
class Trainer {
public:
    Trainer(PpoConfig ppo, EnvConfig env_cfg, CurriculumSchedule curriculum,
            std::uint64_t root_seed);

    /// Run until total_steps (or stop flag). Writes metrics.jsonl,
    /// checkpoints/latest.* and numbered snapshots under out_dir.
    /// Returns the final parameters (also saved as final.weights.json).
    MlpParams train(const std::string& out_dir,
                    const std::atomic<bool>* stop = nullptr);

    /// Restore a checkpoint previously written in out_dir and continue.
    void restore(const std::string& out_dir);

    const MlpParams& params() const { return params_; }
    int current_stage() const { return stage_index_; }
    long long env_steps() const { return env_steps_; }
    int updates_done() const { return update_index_; }

private:
    void apply_stage_to_envs();
    void maybe_promote();
    void save_checkpoint(const std::string& out_dir, bool numbered);
    std::string metrics_line(const UpdateDiagnostics& diag,
                             const std::vector<EpisodeStats>& episodes) const;

    PpoConfig ppo_;
    EnvConfig env_cfg_;
    CurriculumSchedule curriculum_;
    std::uint64_t root_seed_ = 0;

    MlpParams params_;
    AdamState adam_;
    std::vector<Environment> envs_;
    std::vector<Rng> samplers_;
    std::vector<Observation> current_obs_;
    Rng shuffle_rng_;

    int stage_index_ = 0;
    std::deque<int> success_window_;
    long long env_steps_ = 0;
    int update_index_ = 0;
};

/// "ppo" + optional "curriculum" sections of a config document.
PpoConfig ppo_config_from_json_text(const std::string& text);
std::string ppo_config_to_json_text(const PpoConfig& cfg);
CurriculumSchedule curriculum_from_json_text(const std::string& text,
                                             double default_target_alpha);
std::string curriculum_to_json_text(const CurriculumSchedule& schedule);

}  // namespace rvd
