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
#include <stdexcept>
#include <string>

namespace rvd {

/// Bad configuration, bad usage, missing files named on the command line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data files (weights, stats, trajectories).
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unwritable paths and other filesystem failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite state or parameters where finite values are required.
struct InvalidStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure at runtime (non-finite loss, degenerate geometry).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// step() called on an episode that already terminated.
struct EpisodeFinishedError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Propellant depleted to the dry-mass floor. Carries the state the vehicle
/// reached at the moment of exhaustion (mass clamped to the floor).
struct PropellantExhaustedError : std::runtime_error {
    PropellantExhaustedError(std::string msg, Eigen::Vector3d pos,
                             Eigen::Vector3d vel, double floor_mass)
        : std::runtime_error(std::move(msg)),
          pos(std::move(pos)),
          vel(std::move(vel)),
          floor_mass(floor_mass) {}

    Eigen::Vector3d pos;
    Eigen::Vector3d vel;
    double floor_mass;
};

}  // namespace rvd
