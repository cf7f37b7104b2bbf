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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "surfacelab/errors.hpp"

namespace surfacelab {

constexpr size_t words_for(size_t n) { return (n + 63) / 64; }

/// Phase exponent (power of i, mod 4) picked up when the Hermitian Pauli
/// words (x1,z1) and (x2,z2) are multiplied bitwise, left times right.
/// Each bit uses the convention P = i^(x*z) X^x Z^z, so Y = iXZ.
/// Anticommuting positions contribute +1 for the cyclic products XY, YZ, ZX
/// and -1 (= +3) for XZ, YX, ZY.
inline unsigned product_phase_word(uint64_t x1, uint64_t z1, uint64_t x2, uint64_t z2) noexcept {
    const uint64_t anti = (x1 & z2) ^ (z1 & x2);
    const uint64_t neg = (x1 & ~z1 & ~x2 & z2) | (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2);
    return static_cast<unsigned>(std::popcount(anti) + 2 * std::popcount(neg)) & 3U;
}

/// Signed Pauli operator on n qubits, stored as packed X and Z bit masks.
class PauliString {
public:
    PauliString() = default;
    explicit PauliString(size_t n) : n_(n), xs_(words_for(n), 0), zs_(words_for(n), 0) {}

    static PauliString identity(size_t n) { return PauliString(n); }

    /// Parses "+XIZY", "-ZZ" or "XX_Z" ('_' and 'I' are identity).
    static PauliString from_str(std::string_view text) {
        bool negative = false;
        if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
            negative = text.front() == '-';
            text.remove_prefix(1);
        }
        PauliString p(text.size());
        for (size_t q = 0; q < text.size(); ++q) {
            switch (text[q]) {
                case 'I':
                case '_':
                    break;
                case 'X':
                    p.set(q, true, false);
                    break;
                case 'Y':
                    p.set(q, true, true);
                    break;
                case 'Z':
                    p.set(q, false, true);
                    break;
                default:
                    throw ConfigError("invalid Pauli character '" + std::string(1, text[q]) + "'");
            }
        }
        p.negative_ = negative;
        return p;
    }

    size_t size() const noexcept { return n_; }
    bool negative() const noexcept { return negative_; }
    void set_negative(bool v) noexcept { negative_ = v; }

    bool x(size_t q) const noexcept { return (xs_[q >> 6] >> (q & 63)) & 1U; }
    bool z(size_t q) const noexcept { return (zs_[q >> 6] >> (q & 63)) & 1U; }

    void set(size_t q, bool x, bool z) noexcept {
        const uint64_t m = uint64_t{1} << (q & 63);
        xs_[q >> 6] = x ? (xs_[q >> 6] | m) : (xs_[q >> 6] & ~m);
        zs_[q >> 6] = z ? (zs_[q >> 6] | m) : (zs_[q >> 6] & ~m);
    }

    /// 'I', 'X', 'Y' or 'Z' at qubit q.
    char at(size_t q) const noexcept { return "IZXY"[(x(q) ? 2 : 0) + (z(q) ? 1 : 0)]; }

    const std::vector<uint64_t> &xs() const noexcept { return xs_; }
    const std::vector<uint64_t> &zs() const noexcept { return zs_; }

    bool is_identity() const noexcept {
        for (size_t w = 0; w < xs_.size(); ++w) {
            if (xs_[w] | zs_[w]) {
                return false;
            }
        }
        return true;
    }

    size_t weight() const noexcept {
        size_t w = 0;
        for (size_t i = 0; i < xs_.size(); ++i) {
            w += static_cast<size_t>(std::popcount(xs_[i] | zs_[i]));
        }
        return w;
    }

    bool commutes(const PauliString &other) const {
        check_size(other);
        unsigned parity = 0;
        for (size_t w = 0; w < xs_.size(); ++w) {
            parity ^= std::popcount((xs_[w] & other.zs_[w]) ^ (zs_[w] & other.xs_[w])) & 1U;
        }
        return parity == 0;
    }

    /// In-place right multiplication. Returns the power of i of the product
    /// relative to the Hermitian representation; for commuting operands the
    /// result is 0 or 2 and is folded into the sign.
    unsigned mul_right(const PauliString &other) {
        check_size(other);
        unsigned phase = (negative_ ? 2U : 0U) + (other.negative_ ? 2U : 0U);
        for (size_t w = 0; w < xs_.size(); ++w) {
            phase += product_phase_word(xs_[w], zs_[w], other.xs_[w], other.zs_[w]);
            xs_[w] ^= other.xs_[w];
            zs_[w] ^= other.zs_[w];
        }
        phase &= 3U;
        negative_ = (phase & 2U) != 0;
        return phase;
    }

    std::string str() const {
        std::string s(1, negative_ ? '-' : '+');
        for (size_t q = 0; q < n_; ++q) {
            s.push_back(at(q) == 'I' ? '_' : at(q));
        }
        return s;
    }

    friend bool operator==(const PauliString &a, const PauliString &b) noexcept {
        return a.n_ == b.n_ && a.negative_ == b.negative_ && a.xs_ == b.xs_ && a.zs_ == b.zs_;
    }

private:
    void check_size(const PauliString &other) const {
        if (other.n_ != n_) {
            throw ConfigError("Pauli string size mismatch");
        }
    }

    size_t n_ = 0;
    std::vector<uint64_t> xs_;
    std::vector<uint64_t> zs_;
    bool negative_ = false;
};

}  // namespace surfacelab
