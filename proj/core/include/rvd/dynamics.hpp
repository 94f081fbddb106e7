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

#include <Eigen/Core>

namespace rvd {

using Vec3 = Eigen::Vector3d;

/// Standard gravity, m/s^2. Ties thrust to propellant flow.
inline constexpr double kG0 = 9.80665;

/// Default orbital rate, rad/s (500 km circular LEO).
inline constexpr double kDefaultOmega = 1.1068e-3;

/// Default dry-mass floor, kg: nominal 12 kg minus the maximum initial
/// mass displacement of 1.2 kg. Reaching it ends an episode as failure.
inline constexpr double kDefaultDryMassFloor = 10.8;

/// Chaser state relative to the target, LVLH frame centered at the target
/// CoM: x radial (away from Earth), y along-track (V-bar), z cross-track.
struct RelativeState {
    Vec3 pos = Vec3::Zero();   // m
    Vec3 vel = Vec3::Zero();   // m/s
    double mass = 0.0;         // kg

    bool finite() const {
        return pos.allFinite() && vel.allFinite() && std::isfinite(mass) && mass > 0.0;
    }
};

/// Circular-orbit rate of the target.
struct OrbitParams {
    double omega = kDefaultOmega;  // rad/s, > 0
};

/// Net thrust at the chaser CoM, LVLH axes, newtons.
struct ForceVector {
    Vec3 f = Vec3::Zero();
};

/// Acceleration of the relative motion under the Hill/Clohessy-Wiltshire
/// linearization with applied thrust:
///
///   ax =  2*w*vy + 3*w^2*x + Fx/m
///   ay = -2*w*vx          + Fy/m
///   az = -w^2*z           + Fz/m
///
/// Throws InvalidStateError on non-finite input or non-positive mass.
Vec3 cw_acceleration(const RelativeState& state, const ForceVector& force,
                     const OrbitParams& orbit);

/// One classical RK4 step of the relative motion with the force held
/// constant (zero-order hold). Mass decreases linearly at |F|/(isp*g0);
/// the acceleration stages use the stage-time mass, which is exact for
/// the constant-thrust depletion law.
///
/// Throws PropellantExhaustedError when the end-of-step mass would not
/// stay above dry_mass_floor; the exception carries the propagated state
/// with mass clamped to the floor.
RelativeState rk4_step(const RelativeState& state, const ForceVector& force,
                       double dt, const OrbitParams& orbit, double isp,
                       double dry_mass_floor = kDefaultDryMassFloor);

/// Closed-form propagation of the unforced system via its state-transition
/// matrix. Exact for any t; mass unchanged. Serves as the integration
/// oracle in tests.
RelativeState cw_transition(const RelativeState& state0, double t,
                            const OrbitParams& orbit);

/// Rocket-equation propellant depletion: m - thrust*dt/(isp*g0).
/// Throws PropellantExhaustedError (without state payload fields beyond
/// mass) if the result would not stay above dry_mass_floor.
double deplete_mass(double mass, double thrust_magnitude, double dt, double isp,
                    double dry_mass_floor = kDefaultDryMassFloor);

}  // namespace rvd
