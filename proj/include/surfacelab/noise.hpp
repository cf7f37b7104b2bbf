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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "surfacelab/calibration.hpp"
#include "surfacelab/circuit.hpp"
#include "surfacelab/errors.hpp"

namespace surfacelab {

/// Single-qubit Pauli codes: bit 0 = X part, bit 1 = Z part.
enum PauliCode : uint8_t { kI = 0, kX = 1, kZ = 2, kY = 3 };

inline char pauli_letter(uint8_t code) { return "IXZY"[code & 3]; }

/// Probability table over the non-identity Paulis on `arity` qubits.
/// Component k (1 <= k < 4^arity) acts with code (k >> 2j) & 3 on target j.
/// The identity keeps the remaining probability.
struct PauliChannel {
    uint8_t arity = 1;
    std::vector<double> probs = std::vector<double>(4, 0.0);

    static PauliChannel identity(uint8_t arity) {
        PauliChannel c;
        c.arity = arity;
        c.probs.assign(size_t{1} << (2 * arity), 0.0);
        return c;
    }

    size_t components() const noexcept { return probs.size(); }

    double total() const noexcept {
        double s = 0;
        for (size_t k = 1; k < probs.size(); ++k) {
            s += probs[k];
        }
        return s;
    }

    bool is_identity() const noexcept { return total() == 0.0; }

    bool valid() const noexcept {
        for (size_t k = 1; k < probs.size(); ++k) {
            if (!(probs[k] >= 0)) {
                return false;
            }
        }
        return total() <= 1.0 + 1e-12;
    }

    /// Picks a component from a uniform draw u in [0, 1); 0 means identity.
    uint32_t pick(double u) const noexcept {
        double acc = 0;
        for (size_t k = 1; k < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) {
                return static_cast<uint32_t>(k);
            }
        }
        return 0;
    }
};

/// Classical assignment error: p01 = P(report 1 | true 0), p10 = P(report 0 | true 1).
struct ReadoutFlip {
    double p01 = 0;
    double p10 = 0;

    double flip_probability(bool true_bit) const noexcept { return true_bit ? p10 : p01; }
    double mean_error() const noexcept { return 0.5 * (p01 + p10); }
    bool is_identity() const noexcept { return p01 == 0 && p10 == 0; }
};

/// Location class a channel was compiled for.
enum class NoiseSite : uint8_t { AfterOneQubitGate, AfterCZ, Idle, Readout };

struct NoiseChannel {
    NoiseSite site = NoiseSite::AfterOneQubitGate;
    PauliChannel pauli;
    ReadoutFlip readout;

    bool is_readout() const noexcept { return site == NoiseSite::Readout; }

    /// Probability that the channel does anything at all (readout: mean flip).
    double error_probability() const noexcept { return is_readout() ? readout.mean_error() : pauli.total(); }
};

struct NoiseOptions {
    /// Multiplies every channel probability; Pauli channels are capped at the
    /// fully depolarizing total (4^k - 1) / 4^k, readout flips at 1/2.
    double scale = 1.0;
    /// Treat the calibration's average gate errors as Pauli error
    /// probabilities directly instead of converting them.
    bool errors_are_pauli = false;
    bool gate_noise = true;
    bool idle_noise = true;
    bool readout_noise = true;
};

// ---- Channel constructors ------------------------------------------------

/// Uniform depolarizing channel from an average gate error on k qubits.
/// Total Pauli probability p = e * (d + 1) / d with d = 2^k, i.e. 3e/2 for one
/// qubit and 5e/4 for two.
inline PauliChannel depolarizing_from_avg_error(double e, int k, bool errors_are_pauli = false) {
    if (k != 1 && k != 2) {
        throw ConfigError("depolarizing channel supports 1 or 2 qubits");
    }
    if (!(e >= 0 && e < 1)) {
        throw ConfigError("average error must lie in [0, 1)");
    }
    const double d = k == 1 ? 2.0 : 4.0;
    const double p = errors_are_pauli ? e : e * (d + 1) / d;
    PauliChannel c = PauliChannel::identity(static_cast<uint8_t>(k));
    const double each = p / static_cast<double>(c.probs.size() - 1);
    for (size_t i = 1; i < c.probs.size(); ++i) {
        c.probs[i] = each;
    }
    return c;
}

/// Pauli twirl of amplitude and phase damping over an idle of t microseconds.
/// p_X = p_Y = (1 - e^{-t/T1}) / 4, p_Z = (1 - e^{-t/T2}) / 2 - p_X, with p_Z
/// clamped at zero; `clamped` (when given) records whether that happened.
inline PauliChannel idle_channel(double t_us, double t1_us, double t2_us, bool *clamped = nullptr) {
    if (!(t_us >= 0)) {
        throw ConfigError("idle duration must be >= 0");
    }
    if (!(t1_us > 0) || !(t2_us > 0)) {
        throw ConfigError("T1 and T2 must be > 0");
    }
    PauliChannel c = PauliChannel::identity(1);
    if (clamped) {
        *clamped = false;
    }
    if (t_us == 0) {
        return c;
    }
    const double pxy = (1 - std::exp(-t_us / t1_us)) / 4;
    double pz = (1 - std::exp(-t_us / t2_us)) / 2 - pxy;
    if (pz < 0) {
        pz = 0;
        if (clamped) {
            *clamped = true;
        }
    }
    c.probs[kX] = pxy;
    c.probs[kY] = pxy;
    c.probs[kZ] = pz;
    return c;
}

inline ReadoutFlip readout_flip(double f00, double f11) {
    if (!(f00 > 0 && f00 <= 1) || !(f11 > 0 && f11 <= 1)) {
        throw ConfigError("readout fidelities must lie in (0, 1]");
    }
    return {1 - f00, 1 - f11};
}

// ---- Model -----------------------------------------------------------------

/// Channel registry referenced by NOISE instructions. Immutable once built.
class NoiseModel {
public:
    uint32_t add(const NoiseChannel &ch) {
        const std::string key = key_of(ch);
        if (auto it = index_.find(key); it != index_.end()) {
            return it->second;
        }
        const auto id = static_cast<uint32_t>(channels_.size());
        channels_.push_back(ch);
        index_.emplace(key, id);
        return id;
    }

    const NoiseChannel &at(uint32_t id) const {
        if (id >= channels_.size()) {
            throw DataError("NOISE references missing channel id " + std::to_string(id));
        }
        return channels_[id];
    }

    size_t size() const noexcept { return channels_.size(); }
    const std::vector<NoiseChannel> &channels() const noexcept { return channels_; }

    /// Number of idle channels whose dephasing term went negative and was
    /// clamped to zero during compilation.
    size_t clamped_idle_channels = 0;

private:
    static std::string key_of(const NoiseChannel &ch) {
        std::string key(1, static_cast<char>('0' + static_cast<int>(ch.site)));
        char buf[32];
        auto put = [&](double v) {
            std::snprintf(buf, sizeof buf, "%a,", v);
            key += buf;
        };
        if (ch.is_readout()) {
            put(ch.readout.p01);
            put(ch.readout.p10);
        } else {
            key += static_cast<char>('0' + ch.pauli.arity);
            for (double p : ch.pauli.probs) {
                put(p);
            }
        }
        return key;
    }

    std::vector<NoiseChannel> channels_;
    std::map<std::string, uint32_t> index_;
};

struct NoisyCircuit {
    Circuit circuit;
    NoiseModel model;
};

namespace detail {

inline PauliChannel scaled(PauliChannel c, double scale) {
    for (auto &p : c.probs) {
        p *= scale;
    }
    const double cap = 1.0 - 1.0 / static_cast<double>(c.probs.size());
    if (const double t = c.total(); t > cap) {
        for (auto &p : c.probs) {
            p *= cap / t;
        }
    }
    return c;
}

inline ReadoutFlip scaled(ReadoutFlip r, double scale) {
    r.p01 = std::min(0.5, r.p01 * scale);
    r.p10 = std::min(0.5, r.p10 * scale);
    return r;
}

}  // namespace detail

/// Inserts NOISE instructions after every operation of `circuit`:
/// depolarizing after each single-qubit rotation (qubit e1) and each CZ
/// (pair e2, or the average of the CZ's layer pattern when the pair is not
/// listed), an idle channel after each IDLE (qubit T1 and echo T2), and a
/// readout flip after each MEASURE_Z. Channels that would do nothing are not
/// emitted. Qubits missing from the table use table averages.
inline NoisyCircuit attach_noise(const Circuit &circuit, const CalibrationTable &cal, const NoiseOptions &opts = {}) {
    NoisyCircuit out{Circuit(circuit.qubit_names()), NoiseModel{}};
    const auto &names = circuit.qubit_names();
    std::vector<QubitCalibration> qcal;
    qcal.reserve(names.size());
    for (const auto &n : names) {
        qcal.push_back(cal.qubit_or_average(n));
    }
    auto emit = [&](NoiseChannel ch) -> std::optional<uint32_t> {
        if (ch.is_readout()) {
            ch.readout = detail::scaled(ch.readout, opts.scale);
            if (ch.readout.is_identity()) {
                return std::nullopt;
            }
        } else {
            ch.pauli = detail::scaled(ch.pauli, opts.scale);
            if (ch.pauli.is_identity()) {
                return std::nullopt;
            }
        }
        return out.model.add(ch);
    };
    for (const auto &in : circuit.instructions()) {
        out.circuit.push(in);
        switch (in.op) {
            case OpCode::Rot: {
                if (!opts.gate_noise) {
                    break;
                }
                NoiseChannel ch{NoiseSite::AfterOneQubitGate,
                                depolarizing_from_avg_error(qcal[in.q0].e1, 1, opts.errors_are_pauli), {}};
                if (auto id = emit(ch)) {
                    out.circuit.noise(*id, in.q0);
                }
                break;
            }
            case OpCode::CZ: {
                if (!opts.gate_noise) {
                    break;
                }
                double e2 = 0;
                if (const auto *pair = cal.find_pair(names[in.q0], names[in.q1])) {
                    e2 = pair->e2;
                } else if (auto avg = in.tag ? cal.pattern_average(in.tag) : std::nullopt) {
                    e2 = *avg;
                } else {
                    throw ConfigError("no calibration for CZ " + names[in.q0] + "-" + names[in.q1] +
                                      (in.tag ? std::string(" (pattern ") + in.tag + ")" : std::string()));
                }
                NoiseChannel ch{NoiseSite::AfterCZ, depolarizing_from_avg_error(e2, 2, opts.errors_are_pauli), {}};
                if (auto id = emit(ch)) {
                    out.circuit.noise(*id, in.q0, in.q1);
                }
                break;
            }
            case OpCode::Idle: {
                if (!opts.idle_noise || in.duration_ns == 0) {
                    break;
                }
                const auto &q = qcal[in.q0];
                if (std::isinf(q.t1_us) && std::isinf(q.t2_echo_us)) {
                    break;
                }
                bool clamped = false;
                NoiseChannel ch{NoiseSite::Idle, idle_channel(in.duration_ns / 1000.0, q.t1_us, q.t2_echo_us, &clamped),
                                {}};
                out.model.clamped_idle_channels += clamped ? 1 : 0;
                if (auto id = emit(ch)) {
                    out.circuit.noise(*id, in.q0);
                }
                break;
            }
            case OpCode::MeasureZ: {
                if (!opts.readout_noise) {
                    break;
                }
                NoiseChannel ch{NoiseSite::Readout, {}, readout_flip(qcal[in.q0].f00, qcal[in.q0].f11)};
                if (auto id = emit(ch)) {
                    out.circuit.readout_noise(*id, in.q0, in.record);
                }
                break;
            }
            case OpCode::Noise:
                break;
        }
    }
    out.circuit.set_record_count(circuit.n_records());
    return out;
}

}  // namespace surfacelab
