// ramimo - repeater-assisted massive MIMO link simulator
// Copyright (C) 2026 the ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RAMIMO_RNG_HPP
#define RAMIMO_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace ramimo {

// SplitMix64 finalizer, used to turn arbitrary key material into
// well-mixed engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_key(std::uint64_t key, std::uint64_t word) {
    return splitmix64(key ^ (0x9e3779b97f4a7c15ULL + word));
}

/// Deterministic random stream. Streams are identified by a 64-bit key;
/// independent substreams are derived by mixing tag words into the key, so
/// e.g. per-drop and per-block streams never overlap and never shift when
/// unrelated dimensions (repeater count, drop count) change.
///
/// All transforms (uniform, Box-Muller normal) are implemented here rather
/// than via std:: distributions, so output is bit-identical across
/// standard-library implementations.
class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : key_(key), eng_(splitmix64(key)) {}

    RngStream derive(std::uint64_t tag) const { return RngStream(mix_key(key_, tag)); }
    RngStream derive(std::uint64_t tag_a, std::uint64_t tag_b) const {
        return RngStream(mix_key(mix_key(key_, tag_a), tag_b));
    }

    std::uint64_t key() const { return key_; }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard real normal N(0, 1) via Box-Muller (first element of the pair).
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Circularly-symmetric complex normal CN(0, 1): both Box-Muller outputs
    /// are used, each scaled to variance 1/2.
    std::complex<double> cnormal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-std::log(u1));  // = sqrt(-2 ln u1) / sqrt(2)
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

  private:
    std::uint64_t key_;
    std::mt19937_64 eng_;
};

}  // namespace ramimo

#endif  // RAMIMO_RNG_HPP
