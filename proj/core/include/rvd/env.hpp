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

#include <cstdint>
#include <optional>
#include <string>

#include "rvd/dynamics.hpp"
#include "rvd/rng.hpp"

namespace rvd {

/// Soft-docking thresholds. All comparisons are strict (<).
struct DockTolerances {
    double lateral_align = 0.005;     // m, sqrt(x^2 + z^2) at contact
    double approach_vel = 0.02;       // m/s, |vy| at contact
    double normal_vel = 0.01;         // m/s, sqrt(vx^2 + vz^2) at contact
    double dock_plane_margin = 0.005; // m, contact declared at y >= -margin

    DockTolerances scaled(double k) const {
        return {lateral_align * k, approach_vel * k, normal_vel * k,
                dock_plane_margin * k};
    }
};

struct RewardWeights {
    double w_d = 1.0;      // per meter of approach
    double w_f = 0.003;    // per unit of summed |throttle|
    double w_t = 0.001;    // per step
    double r_dock = 100.0; // success bonus, scaled by tolerance headroom
    double r_fail = 50.0;  // cone-violation penalty
};

/// Scenario constants and noise levels. Loaded from the "env" object of a
/// JSON config file; keys mirror the field names (SI units, angles in
/// degrees where noted).
struct EnvConfig {
    double t_max_thrust = 0.010;    // N, per-axis thrust cap
    double isp = 60.0;              // s
    double control_dt = 1.0;        // s
    int max_steps = 1000;
    double cone_half_angle = 10.0;  // deg
    double hold_point_range = 15.0; // m, start distance down -y
    double d_max = 20.0;            // m, navigation-noise reference distance
    double alpha = 0.0;             // navigation noise level (0 = exact)
    double chi = 0.0525;            // thrust-magnitude noise bound (fraction of cap)
    double iota = 0.1;              // deg, thrust deflection bound
    double nominal_mass = 12.0;     // kg
    double omega = kDefaultOmega;   // rad/s
    double dry_mass_floor = kDefaultDryMassFloor;  // kg
    bool actuation_noise = true;
    bool obs_noise_absolute_bound = false;  // alternate reading of the noise law
    double init_pos_dispersion = 2.0;       // m, initial position displacement radius
    double init_vel_dispersion = 0.02;      // m/s
    double init_mass_dispersion = 1.2;      // kg
    DockTolerances tolerances;
    RewardWeights reward_weights;
    std::uint64_t rng_seed = 0;

    double cone_half_angle_rad() const { return cone_half_angle * M_PI / 180.0; }
    double iota_rad() const { return iota * M_PI / 180.0; }
    /// Cap on the perturbed thrust magnitude: all three axes saturated.
    double thrust_magnitude_cap() const { return std::sqrt(3.0) * t_max_thrust; }
    Vec3 hold_point() const { return {0.0, -hold_point_range, 0.0}; }

    void validate() const;  // throws ConfigError

    static EnvConfig from_json_text(const std::string& text);
    static EnvConfig from_json_file(const std::string& path);
    std::string to_json_text() const;
};

/// The 7 values the policy sees, normalized and clipped:
/// pos/d_max to [-1,1], vel/0.1 to [-1,1], mass/nominal to [0,1.2].
struct Observation {
    Vec3 pos_n = Vec3::Zero();
    Vec3 vel_n = Vec3::Zero();
    double mass_n = 0.0;

    Eigen::Matrix<double, 7, 1> to_vector() const {
        Eigen::Matrix<double, 7, 1> v;
        v << pos_n, vel_n, mass_n;
        return v;
    }
};

/// Velocity normalization scale, m/s. Chosen above the initial-velocity
/// dispersion so noise cannot saturate the clipped channels at reset.
inline constexpr double kVelNormScale = 0.1;

/// Pre-normalization noisy measurements, kept for trajectory logs.
struct RawObservation {
    Vec3 pos = Vec3::Zero();
    Vec3 vel = Vec3::Zero();
    double mass = 0.0;
};

/// Per-axis throttle in [-1, 1].
struct Action {
    Vec3 a = Vec3::Zero();

    Action clipped() const {
        return {a.cwiseMax(-1.0).cwiseMin(1.0)};
    }
};

enum class OutcomeKind {
    DockSuccess,
    ConeViolation,
    Timeout,
    PropellantExhausted,
};

const char* outcome_name(OutcomeKind kind);
OutcomeKind outcome_from_name(const std::string& name);  // throws LoadError

struct EpisodeOutcome {
    OutcomeKind kind = OutcomeKind::Timeout;
    double elapsed = 0.0;          // s
    double propellant_used = 0.0;  // kg
    RelativeState terminal_state;
};

/// Curriculum-adjustable knobs applied on top of an EnvConfig. Takes effect
/// at the next reset so an episode's physics never changes mid-flight.
struct StageSettings {
    double tolerance_scale = 1.0;
    double alpha = 0.0;
    bool actuation_noise = true;
};

// ---------------------------------------------------------------------------
// Stateless operations (the environment composes these; tests hit them
// directly)
// ---------------------------------------------------------------------------

/// Initial condition: hold point plus a uniform-magnitude displacement in a
/// uniformly random direction for position and velocity, and a uniform mass
/// displacement.
RelativeState sample_initial(const EnvConfig& cfg, Rng& rng);

/// Deterministic kernel behind sample_initial; exposed so tests can force
/// the displacement draws.
RelativeState sample_initial_from(const EnvConfig& cfg, double pos_mag,
                                  const Vec3& pos_dir, double vel_mag,
                                  const Vec3& vel_dir, double mass_delta);

/// Per-axis throttle-to-force mapping: F_i = a_i * t_max_thrust.
ForceVector action_to_force(const Action& a, const EnvConfig& cfg);

/// Actuation noise: magnitude gets one-sided additive noise
/// clip(0, cap, T + U(0, chi) * cap); direction is deflected from nominal
/// by U(0, iota) about a uniformly random azimuth. Zero force passes
/// through unperturbed.
ForceVector perturb_thrust(const ForceVector& commanded, const EnvConfig& cfg,
                           Rng& rng);

/// Rotate v about axis (normalized internally) by angle, Rodrigues formula.
/// Throws NumericError on a zero axis.
Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle);

/// Navigation noise, measurement-proportional reading: each position and
/// velocity channel independently gets U(-b, b) with
/// b = min(d/d_max, 1) * alpha * |o|; the mass channel gets
/// U(-m_i*alpha, m_i*alpha) where m_i is the episode's initial mass.
/// With cfg.obs_noise_absolute_bound the bound is b = min(d/d_max,1)*alpha
/// for all six kinematic channels (the literal alternate reading).
RawObservation perturb_observation(const RelativeState& state,
                                   double initial_mass, double alpha,
                                   const EnvConfig& cfg, Rng& rng);

Observation normalize_observation(const RawObservation& raw, const EnvConfig& cfg);

/// Termination test. The approach axis is -y toward the target at the
/// origin; the docking plane is y = 0 with a -margin contact band.
///   success: y >= -margin, lateral < lateral_align, |vy| < approach_vel,
///            lateral velocity < normal_vel (strict inequalities)
///   cone:    lateral > tan(half_angle)*|y| + margin while y < -margin,
///            or y > 0 without meeting success
///   timeout: step_index >= max_steps
std::optional<OutcomeKind> check_termination(const RelativeState& state,
                                             const EnvConfig& cfg,
                                             const DockTolerances& tol,
                                             int step_index);

/// Shaped reward: w_d * (d_prev - d_next) - w_f * sum|a_i| - w_t, plus a
/// success bonus r_dock * (0.5 + 0.5 * headroom) where headroom is the
/// smallest normalized margin against the docking thresholds, and -r_fail
/// on a cone violation.
double reward(const RelativeState& prev, const Action& action,
              const RelativeState& next, std::optional<OutcomeKind> outcome,
              const EnvConfig& cfg, const DockTolerances& tol);

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    std::optional<EpisodeOutcome> outcome;
};

/// One MDP instance. Owns its RNG stream and episode state; a single
/// instance is strictly single-threaded, any number of instances may run
/// concurrently.
class Environment {
public:
    explicit Environment(EnvConfig cfg);

    /// Re-key the RNG stream. An episode seed plus the config fully
    /// determines an episode under a fixed policy.
    void seed(std::uint64_t s);

    /// Start a new episode; returns the initial (noisy, normalized)
    /// observation. Applies any pending stage settings first.
    Observation reset();

    /// Advance one control period. Pipeline: clip action -> map to force ->
    /// perturb thrust -> RK4 -> termination -> reward -> noisy observation.
    /// Throws EpisodeFinishedError after the episode has ended.
    StepResult step(const Action& action);

    void set_stage(const StageSettings& stage);  // applied at next reset

    const EnvConfig& config() const { return cfg_; }
    const StageSettings& stage() const { return stage_; }
    const RelativeState& true_state() const { return state_; }
    const RawObservation& last_raw_observation() const { return last_raw_obs_; }
    const ForceVector& last_commanded_force() const { return last_commanded_; }
    const ForceVector& last_applied_force() const { return last_applied_; }
    int step_count() const { return step_count_; }
    double elapsed() const { return step_count_ * cfg_.control_dt; }
    double initial_mass() const { return initial_mass_; }
    double propellant_used() const { return initial_mass_ - state_.mass; }
    double episode_return() const { return episode_return_; }
    bool done() const { return done_; }
    DockTolerances active_tolerances() const {
        return cfg_.tolerances.scaled(stage_.tolerance_scale);
    }

    /// Full state round trip for exact training checkpoint resume.
    std::string serialize() const;
    void deserialize(const std::string& json_text);

private:
    Observation observe();

    EnvConfig cfg_;
    StageSettings stage_;
    StageSettings pending_stage_;
    Rng rng_;
    RelativeState state_;
    RawObservation last_raw_obs_;
    ForceVector last_commanded_;
    ForceVector last_applied_;
    double initial_mass_ = 0.0;
    double episode_return_ = 0.0;
    int step_count_ = 0;
    bool done_ = true;  // must reset() before stepping
};

}  // namespace rvd
