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
#include <string>

#include "rvd/env.hpp"
#include "rvd/rng.hpp"

namespace rvd {

inline constexpr int kObsDim = 7;
inline constexpr int kHiddenDim = 256;
inline constexpr int kActionDim = 3;
inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Actor-critic MLP: 7 -> 256 -> 256 trunk (tanh), a 3-wide tanh action
/// head and a linear scalar value head, plus a state-independent log-std.
/// Weight matrices are stored input-major (rows = inputs), matching the
/// on-disk layout: h1 = tanh(W1' x + b1).
struct MlpParams {
    Eigen::MatrixXd W1;  // 7 x 256
    Eigen::VectorXd b1;  // 256
    Eigen::MatrixXd W2;  // 256 x 256
    Eigen::VectorXd b2;  // 256
    Eigen::MatrixXd Wa;  // 256 x 3
    Eigen::VectorXd ba;  // 3
    Eigen::MatrixXd Wv;  // 256 x 1
    double bv = 0.0;
    Eigen::Vector3d log_std = Eigen::Vector3d::Zero();

    void clamp_log_std() {
        log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    }
    bool finite() const;
    std::size_t parameter_count() const;
};

/// Gradient (or any per-parameter accumulator) with the same shapes.
struct MlpGrads {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd W2;
    Eigen::VectorXd b2;
    Eigen::MatrixXd Wa;
    Eigen::VectorXd ba;
    Eigen::MatrixXd Wv;
    double bv = 0.0;
    Eigen::Vector3d log_std = Eigen::Vector3d::Zero();

    static MlpGrads zeros();
    void set_zero();
    double squared_norm() const;
    void scale(double k);
};

struct PolicyOutput {
    Eigen::Vector3d action_mean = Eigen::Vector3d::Zero();  // tanh image, (-1,1)
    double value = 0.0;
    Eigen::Vector3d log_std = Eigen::Vector3d::Zero();
};

/// Activations cached by a forward pass, consumed by backward. Batched:
/// column b holds sample b.
struct ForwardCache {
    Eigen::MatrixXd X;      // 7 x B
    Eigen::MatrixXd H1;     // 256 x B
    Eigen::MatrixXd H2;     // 256 x B
    Eigen::MatrixXd Mean;   // 3 x B
    Eigen::VectorXd Value;  // B
    bool valid = false;
};

PolicyOutput forward(const MlpParams& params, const Observation& obs);
PolicyOutput forward(const MlpParams& params, const Eigen::Matrix<double, 7, 1>& obs);

/// Batched forward over the columns of X; fills the cache.
void forward_batch(const MlpParams& params, const Eigen::MatrixXd& X,
                   ForwardCache& cache);

/// Reverse pass. grad_mean (3 x B) and grad_value (B) are the loss gradients
/// w.r.t. the batch outputs; grad_log_std passes straight through (the
/// log-std is itself an output). Throws NumericError if the cache is stale.
MlpGrads backward(const MlpParams& params, const ForwardCache& cache,
                  const Eigen::MatrixXd& grad_mean,
                  const Eigen::VectorXd& grad_value,
                  const Eigen::Vector3d& grad_log_std);

struct ActionSample {
    Action action;                 // clipped to [-1, 1], what the env gets
    Eigen::Vector3d pre_clip;      // raw Gaussian sample, what PPO stores
    double log_prob = 0.0;         // density of pre_clip under the Gaussian
};

ActionSample sample_action(const PolicyOutput& out, Rng& rng);

/// log N(x | mean, diag(exp(log_std))^2), summed over the 3 axes.
double gaussian_log_prob(const Eigen::Vector3d& mean,
                         const Eigen::Vector3d& log_std,
                         const Eigen::Vector3d& x);

/// Differential entropy of the diagonal Gaussian.
double gaussian_entropy(const Eigen::Vector3d& log_std);

/// Orthogonal initialization: gain sqrt(2) on the trunk, 0.01 on the action
/// head, 1.0 on the value head; zero biases; log_std = log(0.3).
MlpParams init_params(Rng& rng);

/// rvd-mlp-v1 JSON weight files. Tensors are row-major arrays of 64-bit
/// decimals; observation layout is pos x,y,z then vel x,y,z then mass.
void save_params(const MlpParams& params, const std::string& path);
MlpParams load_params(const std::string& path);
std::string params_to_json_text(const MlpParams& params);
MlpParams params_from_json_text(const std::string& text);

// ---------------------------------------------------------------------------
// 32-bit inference path (latency benchmark analog of the deployed runtime)
// ---------------------------------------------------------------------------

struct MlpParams32 {
    Eigen::MatrixXf W1, W2, Wa, Wv;
    Eigen::VectorXf b1, b2, ba;
    float bv = 0.0f;
};

MlpParams32 to_float32(const MlpParams& params);

struct PolicyOutput32 {
    Eigen::Vector3f action_mean;
    float value;
};

PolicyOutput32 forward32(const MlpParams32& params,
                         const Eigen::Matrix<float, 7, 1>& obs);

}  // namespace rvd
