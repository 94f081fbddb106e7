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
#include <cstdint>
#include <random>
#include <string>

namespace rvd {

/// SplitMix64 finalizer. Used for seed derivation only.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// Stable seed derivation: every random stream in a run is keyed off a single
/// root seed and a stream id. The scheme is part of the on-disk contract
/// (campaign episodes record their derived seed so they can be replayed).
///
///   derive_seed(root, id) = mix64(root + GOLDEN * (id + 1))
constexpr std::uint64_t derive_seed(std::uint64_t root_seed, std::uint64_t stream_id) {
    return mix64(root_seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1));
}

/// Stream-id domains. Campaign episode i uses stream id i directly; the
/// trainer's streams are offset so they can never collide with episode ids.
inline constexpr std::uint64_t kStreamEnvBase     = 1ULL << 32;
inline constexpr std::uint64_t kStreamSamplerBase = 2ULL << 32;
inline constexpr std::uint64_t kStreamShuffle     = 3ULL << 32;
inline constexpr std::uint64_t kStreamInit        = 4ULL << 32;

/// Deterministic random source: std::mt19937_64 (the engine is fully
/// specified by the C++ standard, so sequences are identical across
/// platforms) with hand-rolled distributions on top, because the standard
/// leaves distribution algorithms implementation-defined.
///
/// Distributions:
///   - uniform():        53-bit mantissa double in [0, 1)
///   - uniform(a, b):    a + (b - a) * uniform()
///   - normal():         Box-Muller, second deviate cached
///   - unit_vector3():   uniform direction via (cos-latitude, azimuth)
class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    void seed(std::uint64_t s) {
        engine_.seed(s);
        has_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Unbiased-enough bounded draw (modulo; bias < n / 2^64).
    std::uint64_t next_below(std::uint64_t n) { return engine_() % n; }

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], avoids log(0)
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform direction on the unit sphere.
    Eigen::Vector3d unit_vector3() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * M_PI);
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {rho * std::cos(phi), rho * std::sin(phi), z};
    }

    /// Textual state round trip, used by training checkpoints.
    std::string serialize() const;
    static Rng deserialize(const std::string& text);

    bool operator==(const Rng& other) const {
        return engine_ == other.engine_ && has_spare_ == other.has_spare_ &&
               (!has_spare_ || spare_ == other.spare_);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace rvd
