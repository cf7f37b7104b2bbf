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
#include <optional>
#include <string>
#include <vector>

#include "surfacelab/circuit.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/pauli.hpp"
#include "surfacelab/rng.hpp"

namespace surfacelab {

/// Aaronson-Gottesman stabilizer tableau with destabilizers.
///
/// Rows 0..n-1 are destabilizers, rows n..2n-1 stabilizers, row 2n is the
/// scratch row used for deterministic measurements. Global phase is not
/// tracked; destabilizer signs are meaningless and never read.
class StabilizerTableau {
public:
    explicit StabilizerTableau(size_t n) : n_(n), w_(words_for(n)) {
        if (n == 0) {
            throw ConfigError("tableau needs at least one qubit");
        }
        xs_.assign((2 * n + 1) * w_, 0);
        zs_.assign((2 * n + 1) * w_, 0);
        signs_.assign(2 * n + 1, 0);
        for (size_t q = 0; q < n; ++q) {
            xs_[q * w_ + (q >> 6)] |= bit(q);             // destabilizer X_q
            zs_[(n + q) * w_ + (q >> 6)] |= bit(q);       // stabilizer Z_q
        }
    }

    size_t n_qubits() const noexcept { return n_; }

    PauliString row(size_t r) const {
        PauliString p(n_);
        for (size_t q = 0; q < n_; ++q) {
            p.set(q, xbit(r, q), zbit(r, q));
        }
        p.set_negative(signs_[r] != 0);
        return p;
    }
    PauliString destabilizer(size_t i) const { return row(i); }
    PauliString stabilizer(size_t i) const { return row(n_ + i); }

    // ---- Clifford gates -------------------------------------------------

    void h(size_t q) {
        for_rows(q, [](uint64_t x, uint64_t z, uint64_t &nx, uint64_t &nz) {
            nx = z;
            nz = x;
            return x & z;
        });
    }

    /// R_Y(+pi/2): Z -> X, X -> -Z.
    void ry_plus(size_t q) {
        for_rows(q, [](uint64_t x, uint64_t z, uint64_t &nx, uint64_t &nz) {
            nx = z;
            nz = x;
            return x & ~z;
        });
    }

    /// R_Y(-pi/2): Z -> -X, X -> Z.
    void ry_minus(size_t q) {
        for_rows(q, [](uint64_t x, uint64_t z, uint64_t &nx, uint64_t &nz) {
            nx = z;
            nz = x;
            return z & ~x;
        });
    }

    /// R_X(+pi/2): Z -> -Y, Y -> Z.
    void rx_plus(size_t q) {
        for_rows(q, [](uint64_t x, uint64_t z, uint64_t &nx, uint64_t &nz) {
            nx = x ^ z;
            nz = z;
            return z & ~x;
        });
    }

    /// R_X(-pi/2): Z -> Y, Y -> -Z.
    void rx_minus(size_t q) {
        for_rows(q, [](uint64_t x, uint64_t z, uint64_t &nx, uint64_t &nz) {
            nx = x ^ z;
            nz = z;
            return z & x;
        });
    }

    void x(size_t q) { flip_signs_where(q, false, true); }
    void y(size_t q) { flip_signs_where(q, true, true); }
    void z(size_t q) { flip_signs_where(q, true, false); }

    void cz(size_t a, size_t b) {
        const size_t wa = a >> 6, wb = b >> 6;
        const uint64_t ma = bit(a), mb = bit(b);
        for (size_t r = 0; r < 2 * n_; ++r) {
            uint64_t *xr = &xs_[r * w_];
            uint64_t *zr = &zs_[r * w_];
            const bool xa = xr[wa] & ma, xb = xr[wb] & mb;
            const bool za = zr[wa] & ma, zb = zr[wb] & mb;
            signs_[r] ^= static_cast<uint8_t>(xa & xb & (za ^ zb));
            if (xb) {
                zr[wa] ^= ma;
            }
            if (xa) {
                zr[wb] ^= mb;
            }
        }
    }

    /// Applies one Clifford ROT or CZ instruction. Non-Clifford rotations
    /// (the diagonal X+Y axis) are rejected.
    void apply(const Instruction &in) {
        if (in.op == OpCode::CZ) {
            cz(in.q0, in.q1);
            return;
        }
        if (in.op != OpCode::Rot) {
            throw ConfigError("tableau apply() takes ROT or CZ instructions");
        }
        const size_t q = in.q0;
        switch (in.axis) {
            case Axis::X:
                in.angle == Angle::Plus90 ? rx_plus(q) : in.angle == Angle::Minus90 ? rx_minus(q) : x(q);
                return;
            case Axis::Y:
                in.angle == Angle::Plus90 ? ry_plus(q) : in.angle == Angle::Minus90 ? ry_minus(q) : y(q);
                return;
            case Axis::Z:
                if (in.angle != Angle::Half) {
                    throw ConfigError("Z rotations other than pi are not in the gate set");
                }
                z(q);
                return;
            case Axis::XY:
                throw ConfigError("R_(X+Y) rotation is not Clifford; use the statevector engine");
        }
    }

    /// Conjugates the state by a Pauli operator (sign flips only).
    void apply_pauli(const PauliString &p) {
        if (p.size() != n_) {
            throw ConfigError("Pauli size does not match tableau");
        }
        const auto &px = p.xs();
        const auto &pz = p.zs();
        for (size_t r = 0; r < 2 * n_; ++r) {
            unsigned parity = 0;
            for (size_t w = 0; w < w_; ++w) {
                parity ^= std::popcount((xs_[r * w_ + w] & pz[w]) ^ (zs_[r * w_ + w] & px[w])) & 1U;
            }
            signs_[r] ^= static_cast<uint8_t>(parity);
        }
    }

    // ---- Measurement ----------------------------------------------------

    bool is_deterministic(size_t q) const {
        const size_t w = q >> 6;
        const uint64_t m = bit(q);
        for (size_t r = n_; r < 2 * n_; ++r) {
            if (xs_[r * w_ + w] & m) {
                return false;
            }
        }
        return true;
    }

    /// Measures Z_q. Random outcomes draw one bit from `rng`; the
    /// post-measurement state persists (no reset).
    bool measure_z(size_t q, RngStream &rng) {
        const size_t w = q >> 6;
        const uint64_t m = bit(q);
        size_t p = 2 * n_;
        for (size_t r = n_; r < 2 * n_; ++r) {
            if (xs_[r * w_ + w] & m) {
                p = r;
                break;
            }
        }
        if (p == 2 * n_) {
            clear_row(2 * n_);
            for (size_t i = 0; i < n_; ++i) {
                if (xs_[i * w_ + w] & m) {
                    rowsum(2 * n_, i + n_);
                }
            }
            return signs_[2 * n_] != 0;
        }
        for (size_t r = 0; r < 2 * n_; ++r) {
            if (r != p && (xs_[r * w_ + w] & m)) {
                rowsum(r, p);
            }
        }
        copy_row(p - n_, p);
        clear_row(p);
        zs_[p * w_ + w] |= m;
        const bool outcome = rng.bit();
        signs_[p] = outcome ? 1 : 0;
        return outcome;
    }

    /// Expectation of a Pauli observable on the current state: +1 or -1 when
    /// it is (up to sign) in the stabilizer group, 0 otherwise.
    int peek_observable(const PauliString &obs) const {
        if (obs.size() != n_) {
            throw ConfigError("observable size does not match tableau");
        }
        for (size_t i = 0; i < n_; ++i) {
            if (!obs.commutes(row(n_ + i))) {
                return 0;
            }
        }
        PauliString acc(n_);
        for (size_t i = 0; i < n_; ++i) {
            if (!obs.commutes(row(i))) {
                acc.mul_right(row(n_ + i));
            }
        }
        PauliString unsigned_obs = obs;
        unsigned_obs.set_negative(false);
        const bool acc_neg = acc.negative();
        acc.set_negative(false);
        if (!(acc == unsigned_obs)) {
            return 0;
        }
        return (acc_neg != obs.negative()) ? -1 : 1;
    }

    /// Checks the canonical symplectic pattern: destabilizer i anticommutes
    /// with stabilizer i only; everything else commutes.
    bool validate() const {
        for (size_t a = 0; a < 2 * n_; ++a) {
            for (size_t b = a + 1; b < 2 * n_; ++b) {
                const bool anti = !row_commutes(a, b);
                const bool expect_anti = (b == a + n_) && a < n_;
                if (anti != expect_anti) {
                    return false;
                }
            }
        }
        return true;
    }

private:
    static uint64_t bit(size_t q) noexcept { return uint64_t{1} << (q & 63); }

    bool xbit(size_t r, size_t q) const noexcept { return (xs_[r * w_ + (q >> 6)] >> (q & 63)) & 1U; }
    bool zbit(size_t r, size_t q) const noexcept { return (zs_[r * w_ + (q >> 6)] >> (q & 63)) & 1U; }

    bool row_commutes(size_t a, size_t b) const {
        unsigned parity = 0;
        for (size_t w = 0; w < w_; ++w) {
            parity ^= std::popcount((xs_[a * w_ + w] & zs_[b * w_ + w]) ^ (zs_[a * w_ + w] & xs_[b * w_ + w])) & 1U;
        }
        return parity == 0;
    }

    /// Applies a single-qubit update to every row. `f` receives the bits at q
    /// as all-zero or all-one words and returns the sign-flip indicator.
    template <typename F>
    void for_rows(size_t q, F f) {
        const size_t w = q >> 6;
        const unsigned sh = q & 63;
        const uint64_t m = bit(q);
        for (size_t r = 0; r < 2 * n_; ++r) {
            uint64_t &xw = xs_[r * w_ + w];
            uint64_t &zw = zs_[r * w_ + w];
            const uint64_t x = (xw >> sh) & 1U;
            const uint64_t z = (zw >> sh) & 1U;
            uint64_t nx = 0, nz = 0;
            const uint64_t flip = f(x, z, nx, nz) & 1U;
            xw = (xw & ~m) | (nx << sh);
            zw = (zw & ~m) | (nz << sh);
            signs_[r] ^= static_cast<uint8_t>(flip);
        }
    }

    void flip_signs_where(size_t q, bool on_x, bool on_z) {
        const size_t w = q >> 6;
        const uint64_t m = bit(q);
        for (size_t r = 0; r < 2 * n_; ++r) {
            const bool xb = xs_[r * w_ + w] & m;
            const bool zb = zs_[r * w_ + w] & m;
            signs_[r] ^= static_cast<uint8_t>((on_x && xb) ^ (on_z && zb));
        }
    }

    /// Row h <- row i * row h, with the sign of the product.
    void rowsum(size_t h, size_t i) {
        unsigned phase = (signs_[h] ? 2U : 0U) + (signs_[i] ? 2U : 0U);
        uint64_t *hx = &xs_[h * w_];
        uint64_t *hz = &zs_[h * w_];
        const uint64_t *ix = &xs_[i * w_];
        const uint64_t *iz = &zs_[i * w_];
        for (size_t w = 0; w < w_; ++w) {
            phase += product_phase_word(ix[w], iz[w], hx[w], hz[w]);
            hx[w] ^= ix[w];
            hz[w] ^= iz[w];
        }
        signs_[h] = static_cast<uint8_t>((phase >> 1) & 1U);
    }

    void clear_row(size_t r) {
        for (size_t w = 0; w < w_; ++w) {
            xs_[r * w_ + w] = 0;
            zs_[r * w_ + w] = 0;
        }
        signs_[r] = 0;
    }

    void copy_row(size_t dst, size_t src) {
        for (size_t w = 0; w < w_; ++w) {
            xs_[dst * w_ + w] = xs_[src * w_ + w];
            zs_[dst * w_ + w] = zs_[src * w_ + w];
        }
        signs_[dst] = signs_[src];
    }

    size_t n_;
    size_t w_;
    std::vector<uint64_t> xs_;
    std::vector<uint64_t> zs_;
    std::vector<uint8_t> signs_;
};

}  // namespace surfacelab
