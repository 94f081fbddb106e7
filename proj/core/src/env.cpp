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

#include "rvd/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rvd/errors.hpp"

namespace rvd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// EnvConfig
// ---------------------------------------------------------------------------

void EnvConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string("env config: ") + name + " must be positive");
        }
    };
    positive(t_max_thrust, "t_max_thrust");
    positive(isp, "isp");
    positive(control_dt, "control_dt");
    positive(hold_point_range, "hold_point_range");
    positive(d_max, "d_max");
    positive(nominal_mass, "nominal_mass");
    positive(omega, "omega");
    positive(tolerances.lateral_align, "tolerances.lateral_align");
    positive(tolerances.approach_vel, "tolerances.approach_vel");
    positive(tolerances.normal_vel, "tolerances.normal_vel");
    positive(tolerances.dock_plane_margin, "tolerances.dock_plane_margin");
    if (max_steps < 1) throw ConfigError("env config: max_steps must be >= 1");
    if (alpha < 0.0) throw ConfigError("env config: alpha must be >= 0");
    if (chi < 0.0) throw ConfigError("env config: chi must be >= 0");
    if (iota < 0.0) throw ConfigError("env config: iota must be >= 0");
    if (!(cone_half_angle > 0.0 && cone_half_angle < 90.0)) {
        throw ConfigError("env config: cone_half_angle must be in (0, 90) degrees");
    }
    if (dry_mass_floor <= 0.0 || dry_mass_floor >= nominal_mass) {
        throw ConfigError("env config: dry_mass_floor must be in (0, nominal_mass)");
    }
    if (init_pos_dispersion < 0.0 || init_vel_dispersion < 0.0 ||
        init_mass_dispersion < 0.0) {
        throw ConfigError("env config: initial dispersions must be >= 0");
    }
    if (nominal_mass - init_mass_dispersion < dry_mass_floor) {
        throw ConfigError("env config: initial mass can fall below the dry-mass floor");
    }
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
        }
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) {
        out = it->get<T>();
    }
}

}  // namespace

EnvConfig EnvConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("env config: JSON parse failed: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("env config: document must be a JSON object");

    EnvConfig cfg;
    try {
        reject_unknown_keys(doc,
                            {"t_max_thrust", "isp", "control_dt", "max_steps",
                             "cone_half_angle", "hold_point_range", "d_max", "alpha",
                             "chi", "iota", "nominal_mass", "omega", "dry_mass_floor",
                             "actuation_noise", "obs_noise_absolute_bound",
                             "init_pos_dispersion", "init_vel_dispersion",
                             "init_mass_dispersion", "tolerances", "reward_weights",
                             "rng_seed"},
                            "env config");
        read_if(doc, "t_max_thrust", cfg.t_max_thrust);
        read_if(doc, "isp", cfg.isp);
        read_if(doc, "control_dt", cfg.control_dt);
        read_if(doc, "max_steps", cfg.max_steps);
        read_if(doc, "cone_half_angle", cfg.cone_half_angle);
        read_if(doc, "hold_point_range", cfg.hold_point_range);
        read_if(doc, "d_max", cfg.d_max);
        read_if(doc, "alpha", cfg.alpha);
        read_if(doc, "chi", cfg.chi);
        read_if(doc, "iota", cfg.iota);
        read_if(doc, "nominal_mass", cfg.nominal_mass);
        read_if(doc, "omega", cfg.omega);
        read_if(doc, "dry_mass_floor", cfg.dry_mass_floor);
        read_if(doc, "actuation_noise", cfg.actuation_noise);
        read_if(doc, "obs_noise_absolute_bound", cfg.obs_noise_absolute_bound);
        read_if(doc, "init_pos_dispersion", cfg.init_pos_dispersion);
        read_if(doc, "init_vel_dispersion", cfg.init_vel_dispersion);
        read_if(doc, "init_mass_dispersion", cfg.init_mass_dispersion);
        read_if(doc, "rng_seed", cfg.rng_seed);
        if (doc.contains("tolerances")) {
            const json& t = doc["tolerances"];
            reject_unknown_keys(t,
                                {"lateral_align", "approach_vel", "normal_vel",
                                 "dock_plane_margin"},
                                "env config tolerances");
            read_if(t, "lateral_align", cfg.tolerances.lateral_align);
            read_if(t, "approach_vel", cfg.tolerances.approach_vel);
            read_if(t, "normal_vel", cfg.tolerances.normal_vel);
            read_if(t, "dock_plane_margin", cfg.tolerances.dock_plane_margin);
        }
        if (doc.contains("reward_weights")) {
            const json& r = doc["reward_weights"];
            reject_unknown_keys(r, {"w_d", "w_f", "w_t", "r_dock", "r_fail"},
                                "env config reward_weights");
            read_if(r, "w_d", cfg.reward_weights.w_d);
            read_if(r, "w_f", cfg.reward_weights.w_f);
            read_if(r, "w_t", cfg.reward_weights.w_t);
            read_if(r, "r_dock", cfg.reward_weights.r_dock);
            read_if(r, "r_fail", cfg.reward_weights.r_fail);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("env config: bad value type: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

EnvConfig EnvConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string EnvConfig::to_json_text() const {
    json doc;
    doc["t_max_thrust"] = t_max_thrust;
    doc["isp"] = isp;
    doc["control_dt"] = control_dt;
    doc["max_steps"] = max_steps;
    doc["cone_half_angle"] = cone_half_angle;
    doc["hold_point_range"] = hold_point_range;
    doc["d_max"] = d_max;
    doc["alpha"] = alpha;
    doc["chi"] = chi;
    doc["iota"] = iota;
    doc["nominal_mass"] = nominal_mass;
    doc["omega"] = omega;
    doc["dry_mass_floor"] = dry_mass_floor;
    doc["actuation_noise"] = actuation_noise;
    doc["obs_noise_absolute_bound"] = obs_noise_absolute_bound;
    doc["init_pos_dispersion"] = init_pos_dispersion;
    doc["init_vel_dispersion"] = init_vel_dispersion;
    doc["init_mass_dispersion"] = init_mass_dispersion;
    doc["tolerances"] = {{"lateral_align", tolerances.lateral_align},
                         {"approach_vel", tolerances.approach_vel},
                         {"normal_vel", tolerances.normal_vel},
                         {"dock_plane_margin", tolerances.dock_plane_margin}};
    doc["reward_weights"] = {{"w_d", reward_weights.w_d},
                             {"w_f", reward_weights.w_f},
                             {"w_t", reward_weights.w_t},
                             {"r_dock", reward_weights.r_dock},
                             {"r_fail", reward_weights.r_fail}};
    doc["rng_seed"] = rng_seed;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Outcome names
// ---------------------------------------------------------------------------

const char* outcome_name(OutcomeKind kind) {
    switch (kind) {
        case OutcomeKind::DockSuccess: return "dock_success";
        case OutcomeKind::ConeViolation: return "cone_violation";
        case OutcomeKind::Timeout: return "timeout";
        case OutcomeKind::PropellantExhausted: return "propellant_exhausted";
    }
    return "unknown";
}

OutcomeKind outcome_from_name(const std::string& name) {
    if (name == "dock_success") return OutcomeKind::DockSuccess;
    if (name == "cone_violation") return OutcomeKind::ConeViolation;
    if (name == "timeout") return OutcomeKind::Timeout;
    if (name == "propellant_exhausted") return OutcomeKind::PropellantExhausted;
    throw LoadError("unknown outcome kind \"" + name + "\"");
}

// ---------------------------------------------------------------------------
// Stateless operations
// ---------------------------------------------------------------------------

RelativeState sample_initial_from(const EnvConfig& cfg, double pos_mag,
                                  const Vec3& pos_dir, double vel_mag,
                                  const Vec3& vel_dir, double mass_delta) {
    RelativeState s;
    s.pos = cfg.hold_point() + pos_mag * pos_dir;
    s.vel = vel_mag * vel_dir;
    s.mass = cfg.nominal_mass + mass_delta;
    return s;
}

RelativeState sample_initial(const EnvConfig& cfg, Rng& rng) {
    const double pos_mag = rng.uniform(0.0, cfg.init_pos_dispersion);
    const Vec3 pos_dir = rng.unit_vector3();
    const double vel_mag = rng.uniform(0.0, cfg.init_vel_dispersion);
    const Vec3 vel_dir = rng.unit_vector3();
    const double dm = rng.uniform(-cfg.init_mass_dispersion, cfg.init_mass_dispersion);
    return sample_initial_from(cfg, pos_mag, pos_dir, vel_mag, vel_dir, dm);
}

ForceVector action_to_force(const Action& a, const EnvConfig& cfg) {
    return {a.clipped().a * cfg.t_max_thrust};
}

Vec3 rodrigues_rotate(const Vec3& v, const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw NumericError("rodrigues_rotate: degenerate (zero or non-finite) axis");
    }
    const Vec3 k = axis / n;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return v * c + k.cross(v) * s + k * (k.dot(v)) * (1.0 - c);
}

ForceVector perturb_thrust(const ForceVector& commanded, const EnvConfig& cfg,
                           Rng& rng) {
    const double t = commanded.f.norm();
    if (t == 0.0) return commanded;  // direction undefined at the origin

    const double cap = cfg.thrust_magnitude_cap();
    const double delta_t = rng.uniform(0.0, cfg.chi);
    const double t_hat = std::clamp(t + delta_t * cap, 0.0, cap);

    const double delta_theta = rng.uniform(0.0, cfg.iota_rad());
    const double zeta = rng.uniform(-M_PI, M_PI);

    const Vec3 dir = commanded.f / t;
    // deterministic perpendicular: cross with the axis least aligned with dir
    int least = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(dir[i]) < std::abs(dir[least])) least = i;
    }
    const Vec3 perp = dir.cross(Vec3::Unit(least)).normalized();

    // tilt off-axis by delta_theta, then spin the tilt plane by zeta
    const Vec3 tilted = rodrigues_rotate(dir, perp, delta_theta);
    const Vec3 dir_hat = rodrigues_rotate(tilted, dir, zeta);

    return {t_hat * dir_hat};
}

RawObservation perturb_observation(const RelativeState& state,
                                   double initial_mass, double alpha,
                                   const EnvConfig& cfg, Rng& rng) {
    const double d = state.pos.norm();
    const double scale = std::min(d / cfg.d_max, 1.0) * alpha;

    auto noisy = [&](double o) {
        const double bound = cfg.obs_noise_absolute_bound ? scale : scale * std::abs(o);
        return o + rng.uniform(-bound, bound);
    };

    RawObservation raw;
    for (int i = 0; i < 3; ++i) raw.pos[i] = noisy(state.pos[i]);
    for (int i = 0; i < 3; ++i) raw.vel[i] = noisy(state.vel[i]);
    raw.mass = state.mass + rng.uniform(-initial_mass * alpha, initial_mass * alpha);
    return raw;
}

Observation normalize_observation(const RawObservation& raw, const EnvConfig& cfg) {
    Observation obs;
    obs.pos_n = (raw.pos / cfg.d_max).cwiseMax(-1.0).cwiseMin(1.0);
    obs.vel_n = (raw.vel / kVelNormScale).cwiseMax(-1.0).cwiseMin(1.0);
    obs.mass_n = std::clamp(raw.mass / cfg.nominal_mass, 0.0, 1.2);
    return obs;
}

std::optional<OutcomeKind> check_termination(const RelativeState& state,
                                             const EnvConfig& cfg,
                                             const DockTolerances& tol,
                                             int step_index) {
    const double y = state.pos.y();
    const double lateral = std::hypot(state.pos.x(), state.pos.z());
    const double v_normal = std::hypot(state.vel.x(), state.vel.z());

    if (y >= -tol.dock_plane_margin && lateral < tol.lateral_align &&
        std::abs(state.vel.y()) < tol.approach_vel && v_normal < tol.normal_vel) {
        return OutcomeKind::DockSuccess;
    }
    if (y < -tol.dock_plane_margin) {
        const double allowed =
            std::tan(cfg.cone_half_angle_rad()) * std::abs(y) + tol.dock_plane_margin;
        if (lateral > allowed) return OutcomeKind::ConeViolation;
    } else if (y > 0.0) {
        return OutcomeKind::ConeViolation;  // crossed the plane without docking
    }
    if (step_index >= cfg.max_steps) return OutcomeKind::Timeout;
    return std::nullopt;
}

double reward(const RelativeState& prev, const Action& action,
              const RelativeState& next, std::optional<OutcomeKind> outcome,
              const EnvConfig& cfg, const DockTolerances& tol) {
    const RewardWeights& w = cfg.reward_weights;
    double r = w.w_d * (prev.pos.norm() - next.pos.norm());
    r -= w.w_f * action.clipped().a.cwiseAbs().sum();
    r -= w.w_t;
    if (outcome == OutcomeKind::DockSuccess) {
        const double lateral = std::hypot(next.pos.x(), next.pos.z());
        const double v_normal = std::hypot(next.vel.x(), next.vel.z());
        const double headroom =
            std::clamp(std::min({1.0 - lateral / tol.lateral_align,
                                 1.0 - std::abs(next.vel.y()) / tol.approach_vel,
                                 1.0 - v_normal / tol.normal_vel}),
                       0.0, 1.0);
        r += w.r_dock * (0.5 + 0.5 * headroom);
    } else if (outcome == OutcomeKind::ConeViolation) {
        r -= w.r_fail;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    stage_ = {1.0, cfg_.alpha, cfg_.actuation_noise};
    pending_stage_ = stage_;
    rng_.seed(cfg_.rng_seed);
}

void Environment::seed(std::uint64_t s) { rng_.seed(s); }

void Environment::set_stage(const StageSettings& stage) { pending_stage_ = stage; }

Observation Environment::observe() {
    last_raw_obs_ = perturb_observation(state_, initial_mass_, stage_.alpha, cfg_, rng_);
    return normalize_observation(last_raw_obs_, cfg_);
}

Observation Environment::reset() {
    stage_ = pending_stage_;
    state_ = sample_initial(cfg_, rng_);
    initial_mass_ = state_.mass;
    episode_return_ = 0.0;
    step_count_ = 0;
    done_ = false;
    last_commanded_ = {};
    last_applied_ = {};
    return observe();
}

StepResult Environment::step(const Action& action) {
    if (done_) {
        throw EpisodeFinishedError("Environment::step: episode already finished; reset() first");
    }

    const Action a = action.clipped();
    const RelativeState prev = state_;

    last_commanded_ = action_to_force(a, cfg_);
    last_applied_ = stage_.actuation_noise ? perturb_thrust(last_commanded_, cfg_, rng_)
                                           : last_commanded_;

    const OrbitParams orbit{cfg_.omega};
    std::optional<OutcomeKind> kind;
    RelativeState next;
    try {
        next = rk4_step(prev, last_applied_, cfg_.control_dt, orbit, cfg_.isp,
                        cfg_.dry_mass_floor);
    } catch (const PropellantExhaustedError& e) {
        next.pos = e.pos;
        next.vel = e.vel;
        next.mass = e.floor_mass;
        kind = OutcomeKind::PropellantExhausted;
    }
    ++step_count_;

    const DockTolerances tol = active_tolerances();
    if (!kind) kind = check_termination(next, cfg_, tol, step_count_);

    const double r = reward(prev, a, next, kind, cfg_, tol);
    episode_return_ += r;

    state_ = next;
    StepResult result;
    result.obs = observe();
    result.reward = r;
    result.done = kind.has_value();
    if (kind) {
        done_ = true;
        EpisodeOutcome outcome;
        outcome.kind = *kind;
        outcome.elapsed = elapsed();
        outcome.propellant_used = initial_mass_ - state_.mass;
        outcome.terminal_state = state_;
        result.outcome = outcome;
    }
    return result;
}

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& a) {
    if (!a.is_array() || a.size() != 3) throw LoadError("env state: expected 3-vector");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json stage_to_json(const StageSettings& s) {
    return {{"tolerance_scale", s.tolerance_scale},
            {"alpha", s.alpha},
            {"actuation_noise", s.actuation_noise}};
}

StageSettings stage_from_json(const json& j) {
    StageSettings s;
    s.tolerance_scale = j.at("tolerance_scale").get<double>();
    s.alpha = j.at("alpha").get<double>();
    s.actuation_noise = j.at("actuation_noise").get<bool>();
    return s;
}

}  // namespace

std::string Environment::serialize() const {
    json doc;
    doc["stage"] = stage_to_json(stage_);
    doc["pending_stage"] = stage_to_json(pending_stage_);
    doc["rng"] = rng_.serialize();
    doc["pos"] = vec3_to_json(state_.pos);
    doc["vel"] = vec3_to_json(state_.vel);
    doc["mass"] = state_.mass;
    doc["raw_pos"] = vec3_to_json(last_raw_obs_.pos);
    doc["raw_vel"] = vec3_to_json(last_raw_obs_.vel);
    doc["raw_mass"] = last_raw_obs_.mass;
    doc["f_cmd"] = vec3_to_json(last_commanded_.f);
    doc["f_app"] = vec3_to_json(last_applied_.f);
    doc["initial_mass"] = initial_mass_;
    doc["episode_return"] = episode_return_;
    doc["step_count"] = step_count_;
    doc["done"] = done_;
    return doc.dump();
}

void Environment::deserialize(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
        stage_ = stage_from_json(doc.at("stage"));
        pending_stage_ = stage_from_json(doc.at("pending_stage"));
        rng_ = Rng::deserialize(doc.at("rng").get<std::string>());
        state_.pos = vec3_from_json(doc.at("pos"));
        state_.vel = vec3_from_json(doc.at("vel"));
        state_.mass = doc.at("mass").get<double>();
        last_raw_obs_.pos = vec3_from_json(doc.at("raw_pos"));
        last_raw_obs_.vel = vec3_from_json(doc.at("raw_vel"));
        last_raw_obs_.mass = doc.at("raw_mass").get<double>();
        last_commanded_.f = vec3_from_json(doc.at("f_cmd"));
        last_applied_.f = vec3_from_json(doc.at("f_app"));
        initial_mass_ = doc.at("initial_mass").get<double>();
        episode_return_ = doc.at("episode_return").get<double>();
        step_count_ = doc.at("step_count").get<int>();
        done_ = doc.at("done").get<bool>();
    } catch (const json::exception& e) {
        throw LoadError(std::string("env state: ") + e.what());
    }
}

}  // namespace rvd
