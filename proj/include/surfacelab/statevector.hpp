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

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "surfacelab/circuit.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/pauli.hpp"
#include "surfacelab/rng.hpp"

namespace surfacelab {

using cplx = std::complex<double>;

/// Row-major 2x2 unitary.
using Mat2 = std::array<cplx, 4>;

inline constexpr size_t kDefaultStateVectorCap = 24;

/// Exact unitary of a ROT instruction. R_A(theta) = exp(-i theta A / 2) with
/// A in {X, Y, Z, (X+Y)/sqrt(2)}.
inline Mat2 rotation_matrix(Axis axis, Angle angle) {
    const double theta = angle == Angle::Half ? M_PI : (angle == Angle::Plus90 ? M_PI_2 : -M_PI_2);
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const cplx i(0, 1);
    switch (axis) {
        case Axis::X:
            return {cplx(c), -i * s, -i * s, cplx(c)};
        case Axis::Y:
            return {cplx(c), cplx(-s), cplx(s), cplx(c)};
        case Axis::Z:
            return {std::exp(-i * (theta / 2)), cplx(0), cplx(0), std::exp(i * (theta / 2))};
        case Axis::XY: {
            const double r = s / std::sqrt(2.0);
            return {cplx(c), cplx(-r, -r), cplx(r, -r), cplx(c)};
        }
    }
    return {};
}

/// Dense 2^n amplitude vector; qubit q is bit q of the basis index.
class StateVector {
public:
    explicit StateVector(size_t n, size_t cap = kDefaultStateVectorCap) : n_(n) {
        if (n == 0) {
            throw ConfigError("statevector needs at least one qubit");
        }
        if (n > cap) {
            throw ResourceError("statevector of " + std::to_string(n) + " qubits exceeds the cap of " +
                                std::to_string(cap));
        }
        amps_.assign(size_t{1} << n, cplx(0));
        amps_[0] = 1;
    }

    size_t n_qubits() const noexcept { return n_; }
    size_t dim() const noexcept { return amps_.size(); }
    const std::vector<cplx> &amplitudes() const noexcept { return amps_; }
    std::vector<cplx> &amplitudes() noexcept { return amps_; }

    double norm_squared() const noexcept {
        double s = 0;
        for (const auto &a : amps_) {
            s += a.real() * a.real() + a.imag() * a.imag();
        }
        return s;
    }

    void apply_matrix(size_t q, const Mat2 &u) {
        const size_t stride = size_t{1} << q;
        const double ar = u[0].real(), ai = u[0].imag(), br = u[1].real(), bi = u[1].imag();
        const double cr = u[2].real(), ci = u[2].imag(), dr = u[3].real(), di = u[3].imag();
        auto *v = reinterpret_cast<double *>(amps_.data());
        const size_t dim = amps_.size();
        for (size_t base = 0; base < dim; base += 2 * stride) {
            for (size_t j = base; j < base + stride; ++j) {
                double *p0 = v + 2 * j;
                double *p1 = v + 2 * (j + stride);
                const double x0r = p0[0], x0i = p0[1], x1r = p1[0], x1i = p1[1];
                p0[0] = ar * x0r - ai * x0i + br * x1r - bi * x1i;
                p0[1] = ar * x0i + ai * x0r + br * x1i + bi * x1r;
                p1[0] = cr * x0r - ci * x0i + dr * x1r - di * x1i;
                p1[1] = cr * x0i + ci * x0r + dr * x1i + di * x1r;
            }
        }
    }

    void cz(size_t a, size_t b) {
        if (a == b) {
            throw ConfigError("CZ needs two distinct qubits");
        }
        const size_t mask = (size_t{1} << a) | (size_t{1} << b);
        for (size_t k = 0; k < amps_.size(); ++k) {
            if ((k & mask) == mask) {
                amps_[k] = -amps_[k];
            }
        }
    }

    void x(size_t q) {
        const size_t stride = size_t{1} << q;
        for (size_t base = 0; base < amps_.size(); base += 2 * stride) {
            for (size_t j = base; j < base + stride; ++j) {
                std::swap(amps_[j], amps_[j + stride]);
            }
        }
    }

    void z(size_t q) {
        const size_t m = size_t{1} << q;
        for (size_t k = 0; k < amps_.size(); ++k) {
            if (k & m) {
                amps_[k] = -amps_[k];
            }
        }
    }

    /// Y up to global phase: X then Z.
    void y(size_t q) {
        x(q);
        z(q);
    }

    void apply(const Instruction &in) {
        check(in.q0);
        switch (in.op) {
            case OpCode::Rot:
                apply_matrix(in.q0, rotation_matrix(in.axis, in.angle));
                return;
            case OpCode::CZ:
                check(in.q1);
                cz(in.q0, in.q1);
                return;
            case OpCode::Idle:
                return;
            default:
                throw ConfigError("statevector apply() takes ROT, CZ or IDLE instructions");
        }
    }

    /// Applies a Pauli operator up to global phase.
    void apply_pauli(const PauliString &p) {
        if (p.size() != n_) {
            throw ConfigError("Pauli size does not match statevector");
        }
        for (size_t q = 0; q < n_; ++q) {
            if (p.x(q)) {
                x(q);
            }
            if (p.z(q)) {
                z(q);
            }
        }
    }

    double probability_one(size_t q) const {
        check(q);
        const size_t m = size_t{1} << q;
        double p = 0;
        for (size_t k = 0; k < amps_.size(); ++k) {
            if (k & m) {
                p += std::norm(amps_[k]);
            }
        }
        return p;
    }

    /// Projects qubit q onto `outcome` and renormalizes. Returns the
    /// probability of that outcome before projection.
    double collapse(size_t q, bool outcome) {
        const size_t m = size_t{1} << q;
        double p = 0;
        for (size_t k = 0; k < amps_.size(); ++k) {
            if (((k & m) != 0) == outcome) {
                p += std::norm(amps_[k]);
            } else {
                amps_[k] = 0;
            }
        }
        if (p <= 0) {
            throw DataError("projection onto a zero-probability outcome");
        }
        const double scale = 1.0 / std::sqrt(p);
        for (auto &a : amps_) {
            a *= scale;
        }
        return p;
    }

    /// Z measurement with collapse. Outcomes whose probability is within 1e-12
    /// of 0 or 1 are treated as deterministic and consume no randomness.
    bool measure_z(size_t q, RngStream &rng) {
        const double p1 = probability_one(q);
        bool outcome;
        if (p1 < 1e-12) {
            outcome = false;
        } else if (p1 > 1 - 1e-12) {
            outcome = true;
        } else {
            outcome = rng.uniform() < p1;
        }
        collapse(q, outcome);
        return outcome;
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(amps_.size());
        for (size_t k = 0; k < amps_.size(); ++k) {
            p[k] = std::norm(amps_[k]);
        }
        return p;
    }

private:
    void check(size_t q) const {
        if (q >= n_) {
            throw ConfigError("qubit index out of range");
        }
    }

    size_t n_;
    std::vector<cplx> amps_;
};

}  // namespace surfacelab
