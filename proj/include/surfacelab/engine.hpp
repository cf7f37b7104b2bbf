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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "surfacelab/circuit.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/noise.hpp"
#include "surfacelab/rng.hpp"
#include "surfacelab/statevector.hpp"
#include "surfacelab/tableau.hpp"

namespace surfacelab {

/// Execution back end.
///  - Tableau: one stabilizer tableau per shot.
///  - StateVector: one dense state per shot (required for X+Y rotations).
///  - Frame: Clifford-only; one noiseless tableau reference run plus 64-wide
///    Pauli-frame propagation. Same output distribution as Tableau, much faster.
enum class Engine { Tableau, StateVector, Frame };

inline Engine parse_engine(const std::string &s) {
    if (s == "tableau") {
        return Engine::Tableau;
    }
    if (s == "statevector") {
        return Engine::StateVector;
    }
    if (s == "frame") {
        return Engine::Frame;
    }
    throw ConfigError("unknown engine '" + s + "' (expected tableau, statevector or frame)");
}

inline const char *engine_name(Engine e) {
    switch (e) {
        case Engine::Tableau:
            return "tableau";
        case Engine::StateVector:
            return "statevector";
        case Engine::Frame:
            return "frame";
    }
    return "?";
}

/// Replaces the sampled outcome of one NOISE instruction. Component indexes
/// the channel's Pauli table (0 = identity); for readout channels any nonzero
/// component means "flip".
struct ForcedFault {
    size_t instruction = 0;
    uint32_t component = 0;
};

struct ShotRecord {
    uint64_t shot = 0;
    std::vector<uint8_t> bits;
    uint64_t rng_key = 0;  // seed material of the stream that produced the shot
};

/// Packed shot table. Row s holds the measurement bits of shot s, bit i at
/// byte i/8, position i%8 (LSB first).
class ShotBatch {
public:
    ShotBatch() = default;
    ShotBatch(size_t n_qubits, size_t n_measurements, size_t n_shots, uint64_t seed)
        : n_qubits_(n_qubits),
          n_meas_(n_measurements),
          n_shots_(n_shots),
          seed_(seed),
          row_bytes_((n_measurements + 7) / 8),
          data_(row_bytes_ * n_shots, 0) {}

    size_t n_qubits() const noexcept { return n_qubits_; }
    size_t n_measurements() const noexcept { return n_meas_; }
    size_t n_shots() const noexcept { return n_shots_; }
    uint64_t seed() const noexcept { return seed_; }
    size_t row_bytes() const noexcept { return row_bytes_; }
    const std::vector<uint8_t> &bytes() const noexcept { return data_; }

    bool bit(size_t shot, size_t m) const noexcept { return (data_[shot * row_bytes_ + (m >> 3)] >> (m & 7)) & 1U; }

    void set_bit(size_t shot, size_t m, bool v) noexcept {
        uint8_t &b = data_[shot * row_bytes_ + (m >> 3)];
        b = static_cast<uint8_t>((b & ~(1U << (m & 7))) | (static_cast<unsigned>(v) << (m & 7)));
    }

    const uint8_t *row(size_t shot) const noexcept { return data_.data() + shot * row_bytes_; }
    uint8_t *row(size_t shot) noexcept { return data_.data() + shot * row_bytes_; }

    std::vector<uint8_t> unpack(size_t shot) const {
        std::vector<uint8_t> out(n_meas_);
        for (size_t m = 0; m < n_meas_; ++m) {
            out[m] = bit(shot, m);
        }
        return out;
    }

    bool operator==(const ShotBatch &o) const noexcept {
        return n_qubits_ == o.n_qubits_ && n_meas_ == o.n_meas_ && n_shots_ == o.n_shots_ && seed_ == o.seed_ &&
               data_ == o.data_;
    }

private:
    size_t n_qubits_ = 0;
    size_t n_meas_ = 0;
    size_t n_shots_ = 0;
    uint64_t seed_ = 0;
    size_t row_bytes_ = 0;
    std::vector<uint8_t> data_;
};

// ---- QSHOT1 files ------------------------------------------------------------

inline constexpr char kShotMagic[6] = {'Q', 'S', 'H', 'O', 'T', '1'};

namespace detail {

inline void put_le(std::string &out, uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

inline uint64_t get_le(const std::string &in, size_t pos, int bytes) {
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        v |= static_cast<uint64_t>(static_cast<uint8_t>(in[pos + i])) << (8 * i);
    }
    return v;
}

}  // namespace detail

/// Header: magic, u32 qubits, u32 measurements, u64 shots, u64 seed (all
/// little-endian), then one packed row per shot.
inline std::string serialize_shots(const ShotBatch &b) {
    std::string out(kShotMagic, sizeof kShotMagic);
    detail::put_le(out, b.n_qubits(), 4);
    detail::put_le(out, b.n_measurements(), 4);
    detail::put_le(out, b.n_shots(), 8);
    detail::put_le(out, b.seed(), 8);
    out.append(reinterpret_cast<const char *>(b.bytes().data()), b.bytes().size());
    return out;
}

inline constexpr size_t kShotHeaderBytes = 6 + 4 + 4 + 8 + 8;

inline ShotBatch deserialize_shots(const std::string &in) {
    if (in.size() < kShotHeaderBytes || std::memcmp(in.data(), kShotMagic, sizeof kShotMagic) != 0) {
        throw DataError("not a QSHOT1 shot file");
    }
    const size_t nq = detail::get_le(in, 6, 4);
    const size_t nm = detail::get_le(in, 10, 4);
    const uint64_t ns = detail::get_le(in, 14, 8);
    const uint64_t seed = detail::get_le(in, 22, 8);
    const size_t row = (nm + 7) / 8;
    if (row != 0 && ns > (in.size() - kShotHeaderBytes) / row) {
        throw DataError("shot file truncated");
    }
    if (in.size() != kShotHeaderBytes + row * ns) {
        throw DataError("shot file length does not match its header");
    }
    ShotBatch b(nq, nm, ns, seed);
    std::memcpy(b.row(0), in.data() + kShotHeaderBytes, row * ns);
    return b;
}

inline void write_shots(const std::string &path, const ShotBatch &b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write shot file " + path);
    }
    const std::string bytes = serialize_shots(b);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("short write on " + path);
    }
}

inline ShotBatch read_shots(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open shot file " + path);
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_shots(bytes);
}

// ---- Per-shot execution ---------------------------------------------------------

struct RunOptions {
    Engine engine = Engine::Tableau;
    /// Parallel workers; output does not depend on this.
    size_t workers = 1;
    /// Skip NOISE sampling entirely (channels resolve but never fire).
    bool noiseless = false;
    size_t statevector_cap = kDefaultStateVectorCap;
};

namespace detail {

inline void check_supported(const Circuit &c, Engine engine, const NoiseModel *model) {
    for (size_t i = 0; i < c.size(); ++i) {
        const auto &in = c[i];
        if (in.op == OpCode::Noise) {
            if (!model) {
                throw ConfigError("circuit has NOISE instructions but no noise model was given");
            }
            const auto &ch = model->at(in.channel);
            if (!ch.is_readout() && ch.pauli.arity != in.arity) {
                throw DataError("NOISE instruction " + std::to_string(i) + " arity does not match its channel");
            }
            if (ch.is_readout() && in.record >= c.n_records()) {
                throw DataError("readout NOISE instruction " + std::to_string(i) + " has no record");
            }
        }
        if (engine != Engine::StateVector && !in.is_clifford()) {
            throw ConfigError(std::string(engine_name(engine)) + " engine cannot run R_(X+Y) rotations");
        }
    }
}

template <class State>
void apply_component(State &s, uint32_t q, uint32_t code) {
    switch (code & 3) {
        case kX:
            s.x(q);
            break;
        case kZ:
            s.z(q);
            break;
        case kY:
            s.y(q);
            break;
        default:
            break;
    }
}

/// Runs one shot on `state`. Measurement randomness and noise both come from
/// `rng` in instruction order; every sampled NOISE instruction draws exactly
/// one uniform. With `sample_noise` false no noise is drawn, so the only draws
/// are those of random measurements (this pins measurement randomness across
/// runs that differ only in forced faults).
template <class State>
void run_shot(const Circuit &c, const NoiseModel *model, RngStream &rng, State &state, std::vector<uint8_t> &bits,
              bool sample_noise, const std::vector<ForcedFault> &forced = {}) {
    bits.assign(c.n_records(), 0);
    size_t next_forced = 0;
    for (size_t i = 0; i < c.size(); ++i) {
        const auto &in = c[i];
        switch (in.op) {
            case OpCode::Rot:
            case OpCode::CZ:
                state.apply(in);
                break;
            case OpCode::Idle:
                break;
            case OpCode::MeasureZ:
                bits[in.record] = state.measure_z(in.q0, rng) ? 1 : 0;
                break;
            case OpCode::Noise: {
                std::optional<uint32_t> comp;
                while (next_forced < forced.size() && forced[next_forced].instruction < i) {
                    ++next_forced;
                }
                if (next_forced < forced.size() && forced[next_forced].instruction == i) {
                    comp = forced[next_forced].component;
                }
                if (!comp && !sample_noise) {
                    break;
                }
                const auto &ch = model->at(in.channel);
                if (ch.is_readout()) {
                    bool flip = false;
                    if (comp) {
                        flip = *comp != 0;
                    } else if (sample_noise) {
                        flip = rng.uniform() < ch.readout.flip_probability(bits[in.record]);
                    }
                    bits[in.record] ^= flip ? 1 : 0;
                    break;
                }
                uint32_t k = 0;
                if (comp) {
                    k = *comp;
                } else if (sample_noise) {
                    k = ch.pauli.pick(rng.uniform());
                }
                if (k != 0) {
                    apply_component(state, in.q0, k & 3);
                    if (in.arity == 2) {
                        apply_component(state, in.q1, (k >> 2) & 3);
                    }
                }
                break;
            }
        }
    }
}

/// Splits [0, n) into `workers` contiguous ranges and runs f(begin, end) on each.
inline void parallel_ranges(size_t n, size_t workers, const std::function<void(size_t, size_t)> &f) {
    workers = std::max<size_t>(1, std::min(workers, n));
    if (workers == 1) {
        f(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const size_t chunk = (n + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t b = w * chunk, e = std::min(n, b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                if (b < e) {
                    f(b, e);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

inline constexpr uint64_t kFrameStream = 0xF2A3E;
inline constexpr uint64_t kReferenceStream = 0x2EFE2E;

/// Noiseless reference outcome for the frame engine.
inline std::vector<uint8_t> reference_sample(const Circuit &c, uint64_t seed) {
    StabilizerTableau t(c.n_qubits());
    RngStream rng(seed, {kReferenceStream});
    std::vector<uint8_t> bits;
    run_shot(c, nullptr, rng, t, bits, false);
    return bits;
}

/// Propagates 64 shots' worth of Pauli frames (one lane per shot) through the
/// circuit. `flips[r]` receives lane masks of measurement flips relative to
/// the reference outcome.
inline void frame_block(const Circuit &c, const NoiseModel *model, const std::vector<uint8_t> &ref, RngStream &rng,
                        size_t lanes, bool sample_noise, std::vector<uint64_t> &flips) {
    const size_t n = c.n_qubits();
    const uint64_t lane_mask = lanes >= 64 ? ~uint64_t{0} : ((uint64_t{1} << lanes) - 1);
    std::vector<uint64_t> fx(n, 0), fz(n);
    for (auto &z : fz) {
        z = rng.next_u64() & lane_mask;
    }
    flips.assign(c.n_records(), 0);
    for (const auto &in : c.instructions()) {
        switch (in.op) {
            case OpCode::Rot:
                if (in.angle != Angle::Half) {
                    if (in.axis == Axis::X) {
                        fx[in.q0] ^= fz[in.q0];
                    } else if (in.axis == Axis::Y) {
                        std::swap(fx[in.q0], fz[in.q0]);
                    } else {
                        throw ConfigError("frame engine: unsupported rotation");
                    }
                }
                break;
            case OpCode::CZ:
                fz[in.q0] ^= fx[in.q1];
                fz[in.q1] ^= fx[in.q0];
                break;
            case OpCode::Idle:
                break;
            case OpCode::MeasureZ:
                flips[in.record] = fx[in.q0];
                fz[in.q0] ^= rng.next_u64() & lane_mask;
                break;
            case OpCode::Noise: {
                if (!sample_noise) {
                    break;
                }
                const auto &ch = model->at(in.channel);
                if (ch.is_readout()) {
                    uint64_t &f = flips[in.record];
                    const bool ref_bit = ref[in.record] != 0;
                    for (size_t s = 0; s < lanes; ++s) {
                        const bool true_bit = ref_bit ^ ((f >> s) & 1U);
                        if (rng.uniform() < ch.readout.flip_probability(true_bit)) {
                            f ^= uint64_t{1} << s;
                        }
                    }
                    break;
                }
                for (size_t s = 0; s < lanes; ++s) {
                    const uint32_t k = ch.pauli.pick(rng.uniform());
                    if (k == 0) {
                        continue;
                    }
                    const uint64_t m = uint64_t{1} << s;
                    if (k & 1U) {
                        fx[in.q0] ^= m;
                    }
                    if (k & 2U) {
                        fz[in.q0] ^= m;
                    }
                    if (in.arity == 2) {
                        if (k & 4U) {
                            fx[in.q1] ^= m;
                        }
                        if (k & 8U) {
                            fz[in.q1] ^= m;
                        }
                    }
                }
                break;
            }
        }
    }
}

}  // namespace detail

/// Samples `shots` independent executions of `circuit`.
///
/// Tableau and StateVector shots draw from RngStream(seed, {shot}); Frame
/// blocks of 64 shots draw from RngStream(seed, {kFrameStream, block}).
/// Identical inputs give identical bytes for any worker count.
inline ShotBatch run_circuit(const Circuit &circuit, const NoiseModel *model, size_t shots, uint64_t seed,
                             const RunOptions &opts = {}) {
    detail::check_supported(circuit, opts.engine, model);
    ShotBatch out(circuit.n_qubits(), circuit.n_records(), shots, seed);
    const bool sample_noise = !opts.noiseless;
    if (opts.engine == Engine::Frame) {
        const auto ref = detail::reference_sample(circuit, seed);
        const size_t blocks = (shots + 63) / 64;
        detail::parallel_ranges(blocks, opts.workers, [&](size_t b0, size_t b1) {
            std::vector<uint64_t> flips;
            for (size_t b = b0; b < b1; ++b) {
                RngStream rng(seed, {detail::kFrameStream, b});
                const size_t lanes = std::min<size_t>(64, shots - 64 * b);
                detail::frame_block(circuit, model, ref, rng, lanes, sample_noise, flips);
                for (size_t s = 0; s < lanes; ++s) {
                    uint8_t *row = out.row(64 * b + s);
                    for (size_t r = 0; r < flips.size(); ++r) {
                        const unsigned v = ref[r] ^ static_cast<unsigned>((flips[r] >> s) & 1U);
                        row[r >> 3] |= static_cast<uint8_t>(v << (r & 7));
                    }
                }
            }
        });
        return out;
    }
    detail::parallel_ranges(shots, opts.workers, [&](size_t s0, size_t s1) {
        std::vector<uint8_t> bits;
        for (size_t s = s0; s < s1; ++s) {
            RngStream rng(seed, {s});
            if (opts.engine == Engine::Tableau) {
                StabilizerTableau t(circuit.n_qubits());
                detail::run_shot(circuit, model, rng, t, bits, sample_noise);
            } else {
                StateVector sv(circuit.n_qubits(), opts.statevector_cap);
                detail::run_shot(circuit, model, rng, sv, bits, sample_noise);
            }
            uint8_t *row = out.row(s);
            for (size_t r = 0; r < bits.size(); ++r) {
                row[r >> 3] |= static_cast<uint8_t>(bits[r] << (r & 7));
            }
        }
    });
    return out;
}

/// One tableau or statevector shot with explicit faults and no sampled noise.
/// Measurement randomness comes from RngStream(seed, {shot}).
inline ShotRecord run_with_faults(const Circuit &circuit, const NoiseModel *model, Engine engine, uint64_t seed,
                                  uint64_t shot, const std::vector<ForcedFault> &faults) {
    detail::check_supported(circuit, engine, model);
    ShotRecord rec;
    rec.shot = shot;
    RngStream rng(seed, {shot});
    rec.rng_key = rng.key();
    if (engine == Engine::StateVector) {
        StateVector sv(circuit.n_qubits());
        detail::run_shot(circuit, model, rng, sv, rec.bits, false, faults);
    } else {
        StabilizerTableau t(circuit.n_qubits());
        detail::run_shot(circuit, model, rng, t, rec.bits, false, faults);
    }
    return rec;
}

inline ShotRecord shot_record(const ShotBatch &b, size_t shot, Engine engine = Engine::Tableau) {
    ShotRecord r;
    r.shot = shot;
    r.bits = b.unpack(shot);
    r.rng_key = engine == Engine::Frame ? derive_key(b.seed(), {detail::kFrameStream, shot / 64})
                                        : derive_key(b.seed(), {shot});
    return r;
}

/// Exact outcome distribution of a noiseless circuit, indexed by the record
/// bits read as an integer (record 0 = least significant bit). Branches the
/// statevector at every measurement; limited to 20 records.
inline std::vector<double> exact_distribution(const Circuit &circuit, size_t cap = kDefaultStateVectorCap) {
    if (circuit.n_records() > 20) {
        throw ResourceError("exact distribution supports at most 20 measurement records");
    }
    for (const auto &in : circuit.instructions()) {
        if (in.op == OpCode::Noise) {
            throw ConfigError("exact distribution takes noiseless circuits");
        }
    }
    std::vector<double> dist(size_t{1} << circuit.n_records(), 0.0);
    std::function<void(size_t, StateVector, uint64_t, double)> walk = [&](size_t i, StateVector sv, uint64_t key,
                                                                          double p) {
        for (; i < circuit.size(); ++i) {
            const auto &in = circuit[i];
            if (in.op != OpCode::MeasureZ) {
                sv.apply(in);
                continue;
            }
            const double p1 = sv.probability_one(in.q0);
            if (p1 > 1e-12 && p1 < 1 - 1e-12) {
                StateVector other = sv;
                other.collapse(in.q0, true);
                walk(i + 1, std::move(other), key | (uint64_t{1} << in.record), p * p1);
                sv.collapse(in.q0, false);
                p *= 1 - p1;
            } else if (p1 >= 1 - 1e-12) {
                sv.collapse(in.q0, true);
                key |= uint64_t{1} << in.record;
            } else {
                sv.collapse(in.q0, false);
            }
        }
        dist[key] += p;
    };
    walk(0, StateVector(circuit.n_qubits(), cap), 0, 1.0);
    return dist;
}

/// Empirical distribution over record integers (at most 20 records).
inline std::vector<double> empirical_distribution(const ShotBatch &b) {
    if (b.n_measurements() > 20) {
        throw ResourceError("empirical distribution supports at most 20 measurement records");
    }
    std::vector<double> dist(size_t{1} << b.n_measurements(), 0.0);
    for (size_t s = 0; s < b.n_shots(); ++s) {
        uint64_t key = 0;
        for (size_t m = 0; m < b.n_measurements(); ++m) {
            key |= static_cast<uint64_t>(b.bit(s, m)) << m;
        }
        dist[key] += 1.0;
    }
    for (auto &d : dist) {
        d /= static_cast<double>(std::max<size_t>(1, b.n_shots()));
    }
    return dist;
}

inline double total_variation(const std::vector<double> &p, const std::vector<double> &q) {
    if (p.size() != q.size()) {
        throw ConfigError("distributions differ in support size");
    }
    double s = 0;
    for (size_t i = 0; i < p.size(); ++i) {
        s += std::abs(p[i] - q[i]);
    }
    return 0.5 * s;
}

}  // namespace surfacelab
