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

#include "rvd/dynamics.hpp"

#include <cmath>

#include "rvd/errors.hpp"

namespace rvd {

namespace {

Vec3 accel_at(const Vec3& pos, const Vec3& vel, const Vec3& f, double mass,
              double w) {
    return {2.0 * w * vel.y() + 3.0 * w * w * pos.x() + f.x() / mass,
            -2.0 * w * vel.x() + f.y() / mass,
            -w * w * pos.z() + f.z() / mass};
}

}  // namespace

Vec3 cw_acceleration(const RelativeState& state, const ForceVector& force,
                     const OrbitParams& orbit) {
    if (!state.finite() || !force.f.allFinite() || !std::isfinite(orbit.omega)) {
        throw InvalidStateError("cw_acceleration: non-finite state, force, or orbit rate");
    }
    return accel_at(state.pos, state.vel, force.f, state.mass, orbit.omega);
}

RelativeState rk4_step(const RelativeState& state, const ForceVector& force,
                       double dt, const OrbitParams& orbit, double isp,
                       double dry_mass_floor) {
    if (!state.finite() || !force.f.allFinite()) {
        throw InvalidStateError("rk4_step: non-finite state or force");
    }

    const double w = orbit.omega;
    const Vec3 f = force.f;
    const double mdot = f.norm() / (isp * kG0);
    const double m0 = state.mass;
    const double mh = m0 - mdot * 0.5 * dt;  // stage mass at dt/2
    const double m1 = m0 - mdot * dt;        // stage mass at dt

    const Vec3 k1p = state.vel;
    const Vec3 k1v = accel_at(state.pos, state.vel, f, m0, w);

    const Vec3 k2p = state.vel + 0.5 * dt * k1v;
    const Vec3 k2v = accel_at(state.pos + 0.5 * dt * k1p, k2p, f, mh, w);

    const Vec3 k3p = state.vel + 0.5 * dt * k2v;
    const Vec3 k3v = accel_at(state.pos + 0.5 * dt * k2p, k3p, f, mh, w);

    const Vec3 k4p = state.vel + dt * k3v;
    const Vec3 k4v = accel_at(state.pos + dt * k3p, k4p, f, m1, w);

    RelativeState next;
    next.pos = state.pos + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    next.vel = state.vel + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

    // deplete_mass throws when the floor is reached; forward the propagated
    // kinematics so the caller can terminate at a meaningful state.
    try {
        next.mass = deplete_mass(m0, f.norm(), dt, isp, dry_mass_floor);
    } catch (const PropellantExhaustedError&) {
        throw PropellantExhaustedError("rk4_step: propellant exhausted",
                                       next.pos, next.vel, dry_mass_floor);
    }
    return next;
}

RelativeState cw_transition(const RelativeState& state0, double t,
                            const OrbitParams& orbit) {
    if (!state0.finite()) {
        throw InvalidStateError("cw_transition: non-finite state");
    }

    const double n = orbit.omega;
    const double nt = n * t;
    const double c = std::cos(nt);
    const double s = std::sin(nt);

    const double x0 = state0.pos.x(), y0 = state0.pos.y(), z0 = state0.pos.z();
    const double vx0 = state0.vel.x(), vy0 = state0.vel.y(), vz0 = state0.vel.z();

    RelativeState out;
    out.pos.x() = (4.0 - 3.0 * c) * x0 + (s / n) * vx0 + (2.0 / n) * (1.0 - c) * vy0;
    out.pos.y() = 6.0 * (s - nt) * x0 + y0 + (2.0 / n) * (c - 1.0) * vx0 +
                  ((4.0 * s - 3.0 * nt) / n) * vy0;
    out.pos.z() = c * z0 + (s / n) * vz0;

    out.vel.x() = 3.0 * n * s * x0 + c * vx0 + 2.0 * s * vy0;
    out.vel.y() = 6.0 * n * (c - 1.0) * x0 - 2.0 * s * vx0 + (4.0 * c - 3.0) * vy0;
    out.vel.z() = -n * s * z0 + c * vz0;

    out.mass = state0.mass;
    return out;
}

double deplete_mass(double mass, double thrust_magnitude, double dt, double isp,
                    double dry_mass_floor) {
    if (!(mass > 0.0) || thrust_magnitude < 0.0) {
        throw InvalidStateError("deplete_mass: mass must be > 0 and thrust >= 0");
    }
    const double next = mass - thrust_magnitude * dt / (isp * kG0);
    if (next <= dry_mass_floor) {
        throw PropellantExhaustedError("deplete_mass: dry-mass floor reached",
                                       Vec3::Zero(), Vec3::Zero(), dry_mass_floor);
    }
    return next;
}

}  // namespace rvd
