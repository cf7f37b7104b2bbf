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
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "surfacelab/errors.hpp"

namespace surfacelab {

enum class OpCode : uint8_t { Rot, CZ, Idle, MeasureZ, Noise };

/// Rotation axis. XY is the diagonal (X+Y)/sqrt(2) axis and is non-Clifford
/// at a quarter turn.
enum class Axis : uint8_t { X, Y, Z, XY };

/// Rotation angle in quarter turns: +pi/2, -pi/2 or pi.
enum class Angle : int8_t { Plus90 = 1, Minus90 = -1, Half = 2 };

inline constexpr uint32_t kNoRecord = UINT32_MAX;

/// One timed circuit instruction. Unused fields keep their defaults.
struct Instruction {
    OpCode op = OpCode::Idle;
    Axis axis = Axis::X;
    Angle angle = Angle::Plus90;
    uint8_t arity = 1;  // number of qubit targets (1 or 2)
    char tag = 0;       // CZ layer pattern ('A'..'D') when known
    uint32_t q0 = 0;
    uint32_t q1 = 0;
    uint32_t slot = 0;
    uint32_t record = kNoRecord;  // MEASURE_Z output slot; readout-noise target
    uint32_t channel = 0;         // NOISE channel id
    double duration_ns = 0.0;     // IDLE duration

    bool is_clifford() const noexcept { return !(op == OpCode::Rot && axis == Axis::XY); }
};

/// Time-ordered instruction list over indexed qubits.
///
/// Invariants (checked by validate()): at most one non-NOISE instruction
/// touches a given qubit in a given time slot, slots never decrease along the
/// list, and measurement record slots are 0..n_records-1, each written once.
/// NOISE instructions attach to the operation they follow and share its slot.
class Circuit {
public:
    Circuit() = default;
    explicit Circuit(size_t n_qubits) : n_qubits_(n_qubits) {
        names_.reserve(n_qubits);
        for (size_t q = 0; q < n_qubits; ++q) {
            names_.push_back("q" + std::to_string(q));
        }
    }
    Circuit(std::vector<std::string> names) : n_qubits_(names.size()), names_(std::move(names)) {}

    size_t n_qubits() const noexcept { return n_qubits_; }
    size_t n_records() const noexcept { return n_records_; }
    const std::vector<Instruction> &instructions() const noexcept { return ins_; }
    const std::vector<std::string> &qubit_names() const noexcept { return names_; }
    size_t size() const noexcept { return ins_.size(); }
    const Instruction &operator[](size_t i) const { return ins_[i]; }

    uint32_t last_slot() const noexcept { return ins_.empty() ? 0 : ins_.back().slot; }

    void rot(uint32_t slot, uint32_t q, Axis axis, Angle angle) {
        Instruction in;
        in.op = OpCode::Rot;
        in.axis = axis;
        in.angle = angle;
        in.q0 = check_qubit(q);
        in.slot = slot;
        push(in);
    }

    void cz(uint32_t slot, uint32_t a, uint32_t b, char tag = 0) {
        if (a == b) {
            throw ConfigError("CZ needs two distinct qubits");
        }
        Instruction in;
        in.op = OpCode::CZ;
        in.arity = 2;
        in.tag = tag;
        in.q0 = check_qubit(a);
        in.q1 = check_qubit(b);
        in.slot = slot;
        push(in);
    }

    void idle(uint32_t slot, uint32_t q, double duration_ns) {
        if (duration_ns < 0) {
            throw ConfigError("negative idle duration");
        }
        Instruction in;
        in.op = OpCode::Idle;
        in.q0 = check_qubit(q);
        in.slot = slot;
        in.duration_ns = duration_ns;
        push(in);
    }

    /// Appends a Z measurement and returns its record slot.
    uint32_t measure_z(uint32_t slot, uint32_t q) {
        Instruction in;
        in.op = OpCode::MeasureZ;
        in.q0 = check_qubit(q);
        in.slot = slot;
        in.record = static_cast<uint32_t>(n_records_++);
        push(in);
        return in.record;
    }

    /// Pauli noise on one or two qubits, drawn from channel `channel`.
    void noise(uint32_t channel, uint32_t q) {
        Instruction in;
        in.op = OpCode::Noise;
        in.q0 = check_qubit(q);
        in.channel = channel;
        in.slot = last_slot();
        push(in);
    }

    void noise(uint32_t channel, uint32_t a, uint32_t b) {
        Instruction in;
        in.op = OpCode::Noise;
        in.arity = 2;
        in.q0 = check_qubit(a);
        in.q1 = check_qubit(b);
        in.channel = channel;
        in.slot = last_slot();
        push(in);
    }

    /// Classical readout flip on record `record` (measured from qubit q).
    void readout_noise(uint32_t channel, uint32_t q, uint32_t record) {
        Instruction in;
        in.op = OpCode::Noise;
        in.q0 = check_qubit(q);
        in.record = record;
        in.channel = channel;
        in.slot = last_slot();
        push(in);
    }

    /// Appends an already-formed instruction (used by noise compilation).
    void push(const Instruction &in) {
        if (!ins_.empty() && in.slot < ins_.back().slot) {
            throw ConfigError("instruction slots must be non-decreasing");
        }
        ins_.push_back(in);
    }

    void set_record_count(size_t n) { n_records_ = n; }

    size_t count(OpCode op) const noexcept {
        size_t c = 0;
        for (const auto &in : ins_) {
            c += in.op == op ? 1 : 0;
        }
        return c;
    }

    bool is_clifford() const noexcept {
        for (const auto &in : ins_) {
            if (!in.is_clifford()) {
                return false;
            }
        }
        return true;
    }

    /// Throws DataError describing the first violated invariant.
    void validate() const {
        std::set<std::pair<uint32_t, uint32_t>> touched;
        std::vector<int> written(n_records_, 0);
        uint32_t prev_slot = 0;
        for (size_t i = 0; i < ins_.size(); ++i) {
            const auto &in = ins_[i];
            if (in.slot < prev_slot) {
                throw DataError("instruction " + std::to_string(i) + " goes back in time");
            }
            prev_slot = in.slot;
            if (in.q0 >= n_qubits_ || (in.arity == 2 && in.q1 >= n_qubits_)) {
                throw DataError("instruction " + std::to_string(i) + " addresses a missing qubit");
            }
            if (in.op == OpCode::Noise) {
                continue;
            }
            for (uint32_t k = 0; k < in.arity; ++k) {
                const uint32_t q = k == 0 ? in.q0 : in.q1;
                if (!touched.insert({in.slot, q}).second) {
                    throw DataError("qubit " + names_[q] + " used twice in slot " + std::to_string(in.slot));
                }
            }
            if (in.op == OpCode::MeasureZ) {
                if (in.record >= n_records_ || written[in.record]++) {
                    throw DataError("record slot " + std::to_string(in.record) + " is not unique");
                }
            }
        }
        for (size_t r = 0; r < n_records_; ++r) {
            if (!written[r]) {
                throw DataError("record slot " + std::to_string(r) + " never written");
            }
        }
    }

    /// Text form: one instruction per line, "t=<slot> <GATE> <qubits...>".
    std::string to_text() const {
        std::ostringstream out;
        for (const auto &in : ins_) {
            out << "t=" << in.slot << ' ' << gate_token(in) << ' ' << names_[in.q0];
            if (in.arity == 2) {
                out << ' ' << names_[in.q1];
            }
            out << '\n';
        }
        return out.str();
    }

    static std::string gate_token(const Instruction &in) {
        switch (in.op) {
            case OpCode::Rot: {
                static const char *axes[] = {"RX", "RY", "RZ", "RXY"};
                const char *angle = in.angle == Angle::Plus90 ? "+90" : in.angle == Angle::Minus90 ? "-90" : "180";
                return std::string(axes[static_cast<int>(in.axis)]) + angle;
            }
            case OpCode::CZ:
                return "CZ";
            case OpCode::Idle: {
                std::ostringstream s;
                s << "IDLE(" << in.duration_ns << "ns)";
                return s.str();
            }
            case OpCode::MeasureZ:
                return "MEASURE_Z(m" + std::to_string(in.record) + ")";
            case OpCode::Noise:
                if (in.record != kNoRecord) {
                    return "NOISE(c" + std::to_string(in.channel) + ",m" + std::to_string(in.record) + ")";
                }
                return "NOISE(c" + std::to_string(in.channel) + ")";
        }
        return "?";
    }

private:
    uint32_t check_qubit(uint32_t q) const {
        if (q >= n_qubits_) {
            throw ConfigError("qubit index " + std::to_string(q) + " out of range");
        }
        return q;
    }

    size_t n_qubits_ = 0;
    size_t n_records_ = 0;
    std::vector<std::string> names_;
    std::vector<Instruction> ins_;
};

}  // namespace surfacelab
