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
#include <cstdint>
#include <string>
#include <vector>

#include "surfacelab/calibration.hpp"
#include "surfacelab/circuit.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/layout.hpp"

namespace surfacelab {

/// Memory experiment basis: Z prepares and reads |0_L>, X prepares and reads |-_L>.
enum class Basis : uint8_t { Z, X };

inline Basis parse_basis(const std::string &s) {
    if (s == "z" || s == "Z" || s == "0") {
        return Basis::Z;
    }
    if (s == "x" || s == "X" || s == "-" || s == "minus") {
        return Basis::X;
    }
    throw ConfigError("unknown basis '" + s + "' (expected z or x)");
}

inline const char *basis_name(Basis b) { return b == Basis::Z ? "z" : "x"; }

inline StabType consistent_type(Basis b) { return b == Basis::Z ? StabType::Z : StabType::X; }

inline constexpr int kDDPulses = 6;
inline constexpr int kMaxCycles = 11;

/// Wall-clock duration of one cycle in ns: 5 single-qubit steps (four
/// rotation layers plus the B/C idle), 4 CZ layers, then measurement and
/// resonator depletion.
inline double cycle_duration_ns(const Durations &d) {
    return 5 * d.oneq_ns + 4 * d.twoq_ns + d.measure_ns + d.depletion_ns;
}

inline double cycle_duration_us(const CalibrationTable &cal) { return cycle_duration_ns(cal.durations) / 1000.0; }

/// Measurement record layout: ancilla a in round r (0-based) at
/// r * n_ancillas + a, final data qubit q at n_cycles * n_ancillas + q.
struct RecordMap {
    size_t n_cycles = 0;
    size_t n_ancillas = 0;
    size_t n_data = 0;

    size_t ancilla(size_t round, size_t a) const noexcept { return round * n_ancillas + a; }
    size_t data(size_t q) const noexcept { return n_cycles * n_ancillas + q; }
    size_t total() const noexcept { return n_cycles * n_ancillas + n_data; }
};

struct MemoryCircuit {
    Circuit circuit;
    RecordMap records;
    Basis basis = Basis::Z;
    size_t n_cycles = 0;
};

namespace detail {

/// Data-qubit frame per CZ layer: 0 = computational, 1 = Hadamard-like frame
/// (needed while coupled to an X-ancilla), -1 = uncoupled.
using LayerNeeds = std::array<int, 4>;

/// Frame rotations of one data qubit. Changes are only possible at the four
/// rotation layers L1 (before A), L2 (A-B), L3 (C-D) and L4 (after D); the
/// qubit starts and ends in the computational frame. Picks the assignment
/// with fewest rotations, preferring the computational frame on ties.
inline std::array<int, 4> frame_changes(const LayerNeeds &need, const std::string &name) {
    if (need[1] >= 0 && need[2] >= 0 && need[1] != need[2]) {
        throw ConfigError("data qubit " + name + " needs different frames in layers B and C");
    }
    int best_cost = 99;
    std::array<int, 3> best{};
    for (int fa = 0; fa < 2; ++fa) {
        for (int fbc = 0; fbc < 2; ++fbc) {
            for (int fd = 0; fd < 2; ++fd) {
                if ((need[0] >= 0 && need[0] != fa) || (need[1] >= 0 && need[1] != fbc) ||
                    (need[2] >= 0 && need[2] != fbc) || (need[3] >= 0 && need[3] != fd)) {
                    continue;
                }
                const int cost = (fa != 0) + (fbc != fa) + (fd != fbc) + (fd != 0);
                if (cost < best_cost) {
                    best_cost = cost;
                    best = {fa, fbc, fd};
                }
            }
        }
    }
    // +1: enter the frame (R_Y(-pi/2)), -1: leave it (R_Y(+pi/2)), 0: nothing.
    const int fa = best[0], fbc = best[1], fd = best[2];
    return {fa, fbc - fa, fd - fbc, -fd};
}

/// Appends one error-correction cycle starting at `slot` and returns the
/// first free slot after it. The final cycle skips the decoupling window.
inline uint32_t append_cycle(Circuit &c, const CodeLayout &L, const Durations &dur, uint32_t slot, bool last) {
    const size_t nd = L.n_data(), na = L.n_ancillas();
    std::vector<LayerNeeds> needs(nd, LayerNeeds{-1, -1, -1, -1});
    std::array<std::vector<Coupling>, 4> layers;
    for (const auto &cp : L.couplings) {
        const int k = cp.pattern - 'A';
        layers[k].push_back(cp);
        needs[cp.data][k] = L.ancillas[cp.ancilla].type == StabType::X ? 1 : 0;
    }
    std::vector<std::array<int, 4>> changes(nd);
    for (size_t q = 0; q < nd; ++q) {
        changes[q] = frame_changes(needs[q], L.data[q].name);
    }
    const size_t nq = L.n_qubits();
    auto idle_rest = [&](uint32_t s, const std::vector<bool> &busy, double ns) {
        for (uint32_t q = 0; q < nq; ++q) {
            if (!busy[q]) {
                c.idle(s, q, ns);
            }
        }
    };
    // Rotation layer r (0..3): ancillas open at L1 and close at L4.
    auto rotation_layer = [&](int r, uint32_t s) {
        std::vector<bool> busy(nq, false);
        for (uint32_t q = 0; q < nd; ++q) {
            if (changes[q][r] != 0) {
                c.rot(s, q, Axis::Y, changes[q][r] > 0 ? Angle::Minus90 : Angle::Plus90);
                busy[q] = true;
            }
        }
        if (r == 0 || r == 3) {
            for (size_t a = 0; a < na; ++a) {
                const uint32_t q = L.ancilla_qubit(a);
                c.rot(s, q, Axis::Y, r == 0 ? Angle::Plus90 : Angle::Minus90);
                busy[q] = true;
            }
        }
        idle_rest(s, busy, dur.oneq_ns);
    };
    auto cz_layer = [&](int k, uint32_t s) {
        std::vector<bool> busy(nq, false);
        for (const auto &cp : layers[k]) {
            const uint32_t aq = L.ancilla_qubit(cp.ancilla);
            c.cz(s, cp.data, aq, static_cast<char>('A' + k));
            busy[cp.data] = busy[aq] = true;
        }
        idle_rest(s, busy, dur.twoq_ns);
    };
    rotation_layer(0, slot + 0);
    cz_layer(0, slot + 1);
    rotation_layer(1, slot + 2);
    cz_layer(1, slot + 3);
    idle_rest(slot + 4, std::vector<bool>(nq, false), dur.oneq_ns);
    cz_layer(2, slot + 5);
    rotation_layer(2, slot + 6);
    cz_layer(3, slot + 7);
    rotation_layer(3, slot + 8);
    const uint32_t m = slot + 9;
    for (size_t a = 0; a < na; ++a) {
        c.measure_z(m, L.ancilla_qubit(a));
    }
    if (last) {
        return m + 1;
    }
    // Window of measure + depletion: ancillas sit through depletion, data
    // qubits get 6 Y pulses between 7 equal idle slices.
    const double window = dur.measure_ns + dur.depletion_ns;
    const double slice = std::max(0.0, window - kDDPulses * dur.oneq_ns) / (kDDPulses + 1);
    for (int k = 0; k <= kDDPulses; ++k) {
        const uint32_t s = m + static_cast<uint32_t>(2 * k);
        for (uint32_t q = 0; q < nd; ++q) {
            c.idle(s, q, slice);
        }
        if (k == 0) {
            for (size_t a = 0; a < na; ++a) {
                c.idle(m + 1, L.ancilla_qubit(a), dur.depletion_ns);
            }
        }
        if (k < kDDPulses) {
            for (uint32_t q = 0; q < nd; ++q) {
                c.rot(s + 1, q, Axis::Y, Angle::Half);
            }
        }
    }
    return m + 2 * kDDPulses + 1;
}

}  // namespace detail

/// One stand-alone cycle (rotations, CZ layers, ancilla measurement and the
/// decoupled measurement window) on freshly initialized qubits.
inline Circuit build_cycle_circuit(const CodeLayout &L, const Durations &dur = {}) {
    Circuit c(L.qubit_names());
    detail::append_cycle(c, L, dur, 0, false);
    return c;
}

/// Full memory experiment: optional X-basis preparation, n_cycles cycles
/// without ancilla reset, then a final data measurement in the experiment
/// basis. Records follow RecordMap.
inline MemoryCircuit build_memory_circuit(const CodeLayout &L, Basis basis, size_t n_cycles,
                                          const Durations &dur = {}) {
    if (n_cycles < 1) {
        throw ConfigError("need at least one cycle");
    }
    MemoryCircuit out{Circuit(L.qubit_names()), RecordMap{n_cycles, L.n_ancillas(), L.n_data()}, basis, n_cycles};
    Circuit &c = out.circuit;
    uint32_t slot = 0;
    if (basis == Basis::X) {
        for (uint32_t q = 0; q < L.n_data(); ++q) {
            c.rot(0, q, Axis::Y, Angle::Minus90);
        }
        for (size_t a = 0; a < L.n_ancillas(); ++a) {
            c.idle(0, L.ancilla_qubit(a), dur.oneq_ns);
        }
        slot = 1;
    }
    for (size_t k = 0; k < n_cycles; ++k) {
        slot = detail::append_cycle(c, L, dur, slot, k + 1 == n_cycles);
    }
    // The last ancilla measurement occupies slot - 1; data rotations share it.
    if (basis == Basis::X) {
        for (uint32_t q = 0; q < L.n_data(); ++q) {
            c.rot(slot - 1, q, Axis::Y, Angle::Minus90);
        }
    }
    for (uint32_t q = 0; q < L.n_data(); ++q) {
        c.measure_z(slot, q);
    }
    return out;
}

}  // namespace surfacelab
