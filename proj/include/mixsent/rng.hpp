// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mixsent {

// Deterministic RNG used wherever a seed appears in an interface.
// Distributions are hand-rolled on top of mt19937_64 so results do not
// depend on the standard library's implementation-defined algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0); }

    // uniform integer in [lo, hi], inclusive
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal via Box-Muller; one value per call
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, i));
            std::swap(v[i], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(uniform_int(0, v.size() - 1))];
    }

private:
    std::mt19937_64 engine_;
};

// Stable substream derivation (epoch seeds, per-example seeds, ...).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mixsent
