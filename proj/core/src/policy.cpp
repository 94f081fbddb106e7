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

#include "rvd/policy.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rvd/errors.hpp"

namespace rvd {

using nlohmann::json;

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)
}

// ---------------------------------------------------------------------------
// Parameter containers
// ---------------------------------------------------------------------------

bool MlpParams::finite() const {
    return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite() &&
           Wa.allFinite() && ba.allFinite() && Wv.allFinite() && std::isfinite(bv) &&
           log_std.allFinite();
}

std::size_t MlpParams::parameter_count() const {
    return static_cast<std::size_t>(W1.size() + b1.size() + W2.size() + b2.size() +
                                    Wa.size() + ba.size() + Wv.size()) +
           1 + 3;
}

MlpGrads MlpGrads::zeros() {
    MlpGrads g;
    g.W1 = Eigen::MatrixXd::Zero(kObsDim, kHiddenDim);
    g.b1 = Eigen::VectorXd::Zero(kHiddenDim);
    g.W2 = Eigen::MatrixXd::Zero(kHiddenDim, kHiddenDim);
    g.b2 = Eigen::VectorXd::Zero(kHiddenDim);
    g.Wa = Eigen::MatrixXd::Zero(kHiddenDim, kActionDim);
    g.ba = Eigen::VectorXd::Zero(kActionDim);
    g.Wv = Eigen::MatrixXd::Zero(kHiddenDim, 1);
    g.bv = 0.0;
    g.log_std.setZero();
    return g;
}

void MlpGrads::set_zero() {
    W1.setZero();
    b1.setZero();
    W2.setZero();
    b2.setZero();
    Wa.setZero();
    ba.setZero();
    Wv.setZero();
    bv = 0.0;
    log_std.setZero();
}

double MlpGrads::squared_norm() const {
    return W1.squaredNorm() + b1.squaredNorm() + W2.squaredNorm() + b2.squaredNorm() +
           Wa.squaredNorm() + ba.squaredNorm() + Wv.squaredNorm() + bv * bv +
           log_std.squaredNorm();
}

void MlpGrads::scale(double k) {
    W1 *= k;
    b1 *= k;
    W2 *= k;
    b2 *= k;
    Wa *= k;
    ba *= k;
    Wv *= k;
    bv *= k;
    log_std *= k;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

void forward_batch(const MlpParams& params, const Eigen::MatrixXd& X,
                   ForwardCache& cache) {
    if (X.rows() != kObsDim) {
        throw ConfigError("forward: observation batch must have 7 rows");
    }
    const auto b = X.cols();
    cache.X = X;
    cache.H1.noalias() = params.W1.transpose() * X;
    cache.H1.colwise() += params.b1;
    cache.H1 = cache.H1.array().tanh();
    cache.H2.noalias() = params.W2.transpose() * cache.H1;
    cache.H2.colwise() += params.b2;
    cache.H2 = cache.H2.array().tanh();
    cache.Mean.noalias() = params.Wa.transpose() * cache.H2;
    cache.Mean.colwise() += params.ba.head<3>();
    cache.Mean = cache.Mean.array().tanh();
    cache.Value = (params.Wv.transpose() * cache.H2).transpose();
    cache.Value.array() += params.bv;
    cache.valid = true;
    (void)b;
}

PolicyOutput forward(const MlpParams& params, const Eigen::Matrix<double, 7, 1>& obs) {
    Eigen::VectorXd h1 = (params.W1.transpose() * obs + params.b1).array().tanh();
    Eigen::VectorXd h2 = (params.W2.transpose() * h1 + params.b2).array().tanh();
    PolicyOutput out;
    out.action_mean = (params.Wa.transpose() * h2 + params.ba).array().tanh();
    out.value = (params.Wv.transpose() * h2)(0) + params.bv;
    out.log_std = params.log_std;
    return out;
}

PolicyOutput forward(const MlpParams& params, const Observation& obs) {
    return forward(params, obs.to_vector());
}

MlpGrads backward(const MlpParams& params, const ForwardCache& cache,
                  const Eigen::MatrixXd& grad_mean,
                  const Eigen::VectorXd& grad_value,
                  const Eigen::Vector3d& grad_log_std) {
    if (!cache.valid) {
        throw NumericError("backward: forward cache not populated");
    }
    const auto b = cache.X.cols();
    if (grad_mean.cols() != b || grad_value.size() != b) {
        throw ConfigError("backward: upstream gradient batch size mismatch");
    }

    MlpGrads g = MlpGrads::zeros();
    g.log_std = grad_log_std;

    // action head: Mean = tanh(Ua), dUa = gMean * (1 - Mean^2)
    Eigen::MatrixXd dUa = grad_mean.array() * (1.0 - cache.Mean.array().square());
    g.Wa.noalias() = cache.H2 * dUa.transpose();
    g.ba = dUa.rowwise().sum();

    // value head (linear)
    g.Wv.noalias() = cache.H2 * grad_value;
    g.bv = grad_value.sum();

    Eigen::MatrixXd dH2 = params.Wa * dUa;
    dH2.noalias() += params.Wv * grad_value.transpose();

    Eigen::MatrixXd dU2 = dH2.array() * (1.0 - cache.H2.array().square());
    g.W2.noalias() = cache.H1 * dU2.transpose();
    g.b2 = dU2.rowwise().sum();

    Eigen::MatrixXd dH1 = params.W2 * dU2;
    Eigen::MatrixXd dU1 = dH1.array() * (1.0 - cache.H1.array().square());
    g.W1.noalias() = cache.X * dU1.transpose();
    g.b1 = dU1.rowwise().sum();

    return g;
}

// ---------------------------------------------------------------------------
// Gaussian head
// ---------------------------------------------------------------------------

ActionSample sample_action(const PolicyOutput& out, Rng& rng) {
    ActionSample s;
    for (int i = 0; i < kActionDim; ++i) {
        const double sigma = std::exp(out.log_std[i]);
        s.pre_clip[i] = out.action_mean[i] + sigma * rng.normal();
    }
    s.log_prob = gaussian_log_prob(out.action_mean, out.log_std, s.pre_clip);
    s.action.a = s.pre_clip.cwiseMax(-1.0).cwiseMin(1.0);
    return s;
}

double gaussian_log_prob(const Eigen::Vector3d& mean,
                         const Eigen::Vector3d& log_std,
                         const Eigen::Vector3d& x) {
    double lp = 0.0;
    for (int i = 0; i < kActionDim; ++i) {
        const double z = (x[i] - mean[i]) * std::exp(-log_std[i]);
        lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
    }
    return lp;
}

double gaussian_entropy(const Eigen::Vector3d& log_std) {
    return log_std.sum() + kActionDim * (0.5 + kHalfLog2Pi);
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

/// Semi-orthogonal matrix with orthonormal columns (rows >= cols), scaled
/// by gain. QR of a Gaussian matrix with the usual sign correction.
Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
    Eigen::MatrixXd gauss(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            gauss(r, c) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    const Eigen::MatrixXd r_mat = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (int c = 0; c < cols; ++c) {
        if (r_mat(c, c) < 0.0) q.col(c) = -q.col(c);
    }
    return gain * q;
}

}  // namespace

MlpParams init_params(Rng& rng) {
    const double gain_hidden = std::sqrt(2.0);
    MlpParams p;
    // W1 rows live in R^256; orthogonality holds on the 7-dim side
    p.W1 = orthogonal(kHiddenDim, kObsDim, gain_hidden, rng).transpose();
    p.b1 = Eigen::VectorXd::Zero(kHiddenDim);
    p.W2 = orthogonal(kHiddenDim, kHiddenDim, gain_hidden, rng);
    p.b2 = Eigen::VectorXd::Zero(kHiddenDim);
    p.Wa = orthogonal(kHiddenDim, kActionDim, 0.01, rng);
    p.ba = Eigen::VectorXd::Zero(kActionDim);
    p.Wv = orthogonal(kHiddenDim, 1, 1.0, rng);
    p.bv = 0.0;
    p.log_std.setConstant(std::log(0.3));
    return p;
}

// ---------------------------------------------------------------------------
// Serialization (rvd-mlp-v1)
// ---------------------------------------------------------------------------

namespace {

json matrix_to_rowmajor(const Eigen::MatrixXd& m) {
    json arr = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            arr.push_back(m(r, c));
        }
    }
    return arr;
}

void check_shape(const json& shapes, const char* name, int rows, int cols) {
    if (!shapes.contains(name)) {
        throw LoadError(std::string("weights: missing shape for ") + name);
    }
    const json& s = shapes[name];
    const bool ok = s.is_array() &&
                    ((cols == 0 && s.size() == 1 && s[0] == rows) ||
                     (cols > 0 && s.size() == 2 && s[0] == rows && s[1] == cols));
    if (!ok) {
        std::ostringstream msg;
        msg << "weights: shape mismatch for " << name << ": expected [" << rows;
        if (cols > 0) msg << "," << cols;
        msg << "], got " << s.dump();
        throw LoadError(msg.str());
    }
}

Eigen::MatrixXd matrix_from_rowmajor(const json& tensors, const char* name, int rows,
                                     int cols) {
    if (!tensors.contains(name)) {
        throw LoadError(std::string("weights: missing tensor ") + name);
    }
    const json& arr = tensors[name];
    if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows * cols)) {
        std::ostringstream msg;
        msg << "weights: tensor " << name << " has " << arr.size()
            << " values, expected " << rows * cols;
        throw LoadError(msg.str());
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c, ++k) {
            if (!arr[k].is_number()) {
                throw LoadError(std::string("weights: non-numeric value in ") + name);
            }
            m(r, c) = arr[k].get<double>();
        }
    }
    if (!m.allFinite()) {
        throw LoadError(std::string("weights: non-finite values in ") + name);
    }
    return m;
}

}  // namespace

std::string params_to_json_text(const MlpParams& params) {
    json doc;
    doc["format"] = "rvd-mlp-v1";
    doc["obs_layout"] = "pos_xyz,vel_xyz,mass";
    doc["shapes"] = {{"W1", {kObsDim, kHiddenDim}},
                     {"b1", {kHiddenDim}},
                     {"W2", {kHiddenDim, kHiddenDim}},
                     {"b2", {kHiddenDim}},
                     {"W_a", {kHiddenDim, kActionDim}},
                     {"b_a", {kActionDim}},
                     {"W_v", {kHiddenDim, 1}},
                     {"b_v", {1}},
                     {"log_std", {kActionDim}}};
    json tensors;
    tensors["W1"] = matrix_to_rowmajor(params.W1);
    tensors["b1"] = matrix_to_rowmajor(params.b1);
    tensors["W2"] = matrix_to_rowmajor(params.W2);
    tensors["b2"] = matrix_to_rowmajor(params.b2);
    tensors["W_a"] = matrix_to_rowmajor(params.Wa);
    tensors["b_a"] = matrix_to_rowmajor(params.ba);
    tensors["W_v"] = matrix_to_rowmajor(params.Wv);
    tensors["b_v"] = json::array({params.bv});
    tensors["log_std"] = matrix_to_rowmajor(params.log_std);
    doc["tensors"] = std::move(tensors);
    return doc.dump();
}

MlpParams params_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw LoadError(std::string("weights: JSON parse failed: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != std::string("rvd-mlp-v1")) {
        throw LoadError("weights: missing or unsupported format (want rvd-mlp-v1)");
    }
    if (!doc.contains("shapes") || !doc.contains("tensors")) {
        throw LoadError("weights: missing shapes or tensors section");
    }
    const json& shapes = doc["shapes"];
    const json& tensors = doc["tensors"];

    check_shape(shapes, "W1", kObsDim, kHiddenDim);
    check_shape(shapes, "b1", kHiddenDim, 0);
    check_shape(shapes, "W2", kHiddenDim, kHiddenDim);
    check_shape(shapes, "b2", kHiddenDim, 0);
    check_shape(shapes, "W_a", kHiddenDim, kActionDim);
    check_shape(shapes, "b_a", kActionDim, 0);
    check_shape(shapes, "W_v", kHiddenDim, 1);
    check_shape(shapes, "b_v", 1, 0);
    check_shape(shapes, "log_std", kActionDim, 0);

    MlpParams p;
    p.W1 = matrix_from_rowmajor(tensors, "W1", kObsDim, kHiddenDim);
    p.b1 = matrix_from_rowmajor(tensors, "b1", kHiddenDim, 1);
    p.W2 = matrix_from_rowmajor(tensors, "W2", kHiddenDim, kHiddenDim);
    p.b2 = matrix_from_rowmajor(tensors, "b2", kHiddenDim, 1);
    p.Wa = matrix_from_rowmajor(tensors, "W_a", kHiddenDim, kActionDim);
    p.ba = matrix_from_rowmajor(tensors, "b_a", kActionDim, 1);
    p.Wv = matrix_from_rowmajor(tensors, "W_v", kHiddenDim, 1);
    p.bv = matrix_from_rowmajor(tensors, "b_v", 1, 1)(0, 0);
    p.log_std = matrix_from_rowmajor(tensors, "log_std", kActionDim, 1);
    for (int i = 0; i < kActionDim; ++i) {
        if (p.log_std[i] < kLogStdMin || p.log_std[i] > kLogStdMax) {
            throw LoadError("weights: log_std out of range [-20, 2]");
        }
    }
    return p;
}

void save_params(const MlpParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weights file: " + path);
    out << params_to_json_text(params) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

MlpParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open weights file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return params_from_json_text(buf.str());
}

// ---------------------------------------------------------------------------
// 32-bit inference path
// ---------------------------------------------------------------------------

MlpParams32 to_float32(const MlpParams& params) {
    MlpParams32 f;
    f.W1 = params.W1.cast<float>();
    f.b1 = params.b1.cast<float>();
    f.W2 = params.W2.cast<float>();
    f.b2 = params.b2.cast<float>();
    f.Wa = params.Wa.cast<float>();
    f.ba = params.ba.cast<float>();
    f.Wv = params.Wv.cast<float>();
    f.bv = static_cast<float>(params.bv);
    return f;
}

PolicyOutput32 forward32(const MlpParams32& params,
                         const Eigen::Matrix<float, 7, 1>& obs) {
    Eigen::VectorXf h1 = (params.W1.transpose() * obs + params.b1).array().tanh();
    Eigen::VectorXf h2 = (params.W2.transpose() * h1 + params.b2).array().tanh();
    PolicyOutput32 out;
    out.action_mean = (params.Wa.transpose() * h2 + params.ba).array().tanh();
    out.value = (params.Wv.transpose() * h2)(0) + params.bv;
    return out;
}

}  // namespace rvd
