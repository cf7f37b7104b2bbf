// Copyright 2026 The surfacelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <initializer_list>

namespace surfacelab {

/// SplitMix64 finalizer. Used both as a seed scrambler and as the hash that
/// derives independent sub-streams from (seed, stream-id...) tuples.
constexpr uint64_t splitmix64(uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a 64-bit key from a root seed and a path of stream ids.
/// derive_key(seed, {a, b}) is the documented "hash split" used everywhere a
/// sub-seed is needed (per shot, per trajectory, per circuit instance).
constexpr uint64_t derive_key(uint64_t seed, std::initializer_list<uint64_t> path) noexcept {
    uint64_t h = splitmix64(seed ^ 0x5EEDF00DCAFEBABEULL);
    for (uint64_t p : path) {
        h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

/// Counter-addressed random stream: the state is fully determined by the key,
/// so stream k of a run can be regenerated without touching streams 0..k-1.
/// Generator core is xoshiro256**; results are platform independent because
/// every conversion below is written out explicitly.
class RngStream {
public:
    explicit RngStream(uint64_t key = 0) noexcept { reseed(key); }

    RngStream(uint64_t seed, std::initializer_list<uint64_t> path) noexcept {
        reseed(derive_key(seed, path));
    }

    void reseed(uint64_t key) noexcept {
        key_ = key;
        uint64_t x = key;
        for (auto &w : s_) {
            x += 0x9E3779B97F4A7C15ULL;
            w = splitmix64(x);
        }
    }

    uint64_t key() const noexcept { return key_; }

    uint64_t next_u64() noexcept {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bit() noexcept { return (next_u64() >> 63) != 0; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
    uint64_t below(uint64_t n) noexcept {
        if (n <= 1) {
            return 0;
        }
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            const uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static constexpr uint64_t rotl(uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    uint64_t key_ = 0;
    uint64_t s_[4] = {};
};

}  // namespace surfacelab
