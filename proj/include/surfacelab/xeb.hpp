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
#include <sstream>
#include <string>
#include <vector>

#include "surfacelab/calibration.hpp"
#include "surfacelab/circuit.hpp"
#include "surfacelab/engine.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/layout.hpp"
#include "surfacelab/noise.hpp"
#include "surfacelab/rng.hpp"
#include "surfacelab/statevector.hpp"

namespace surfacelab {

inline constexpr size_t kXebSingleLayers = 21;
inline constexpr size_t kXebTwoQubitLayers = 20;

// Stream ids under the run seed.
inline constexpr uint64_t kXebCircuitStream = 0xC12C;
inline constexpr uint64_t kXebCleanStream = 0xC1EA;
inline constexpr uint64_t kXebTrajectoryStream = 0x7EA7;

struct RandomCircuit {
    Circuit circuit;
    uint64_t seed = 0;
    /// gates[layer][qubit]: 0 = RX(+90), 1 = RY(+90), 2 = RXY(+90).
    std::vector<std::vector<uint8_t>> gates;
    std::vector<char> patterns;  // CZ pattern of each two-qubit layer
};

/// 21 single-qubit layers interleaved with 20 CZ layers cycling A, B, C, D.
/// Each qubit's gate differs from its previous one. Qubits outside the CZ
/// layer idle for one CZ duration. All qubits are measured at the end
/// (record q = qubit q).
inline RandomCircuit generate_random_circuit(const CodeLayout &L, uint64_t seed, const Durations &dur = {}) {
    RandomCircuit out{Circuit(L.qubit_names()), seed, {}, {}};
    Circuit &c = out.circuit;
    const size_t nq = L.n_qubits();
    RngStream rng(seed, {kXebCircuitStream});
    static constexpr Axis kPool[3] = {Axis::X, Axis::Y, Axis::XY};
    std::vector<uint8_t> prev(nq, 3);
    uint32_t slot = 0;
    for (size_t layer = 0; layer < kXebSingleLayers; ++layer) {
        std::vector<uint8_t> g(nq);
        for (uint32_t q = 0; q < nq; ++q) {
            uint8_t pick = static_cast<uint8_t>(rng.below(prev[q] == 3 ? 3 : 2));
            if (prev[q] != 3 && pick >= prev[q]) {
                ++pick;
            }
            g[q] = prev[q] = pick;
            c.rot(slot, q, kPool[pick], Angle::Plus90);
        }
        out.gates.push_back(std::move(g));
        ++slot;
        if (layer + 1 == kXebSingleLayers) {
            break;
        }
        const char pattern = static_cast<char>('A' + layer % 4);
        out.patterns.push_back(pattern);
        std::vector<bool> busy(nq, false);
        for (const auto &cp : L.couplings) {
            if (cp.pattern != pattern) {
                continue;
            }
            const uint32_t aq = L.ancilla_qubit(cp.ancilla);
            c.cz(slot, cp.data, aq, pattern);
            busy[cp.data] = busy[aq] = true;
        }
        for (uint32_t q = 0; q < nq; ++q) {
            if (!busy[q]) {
                c.idle(slot, q, dur.twoq_ns);
            }
        }
        ++slot;
    }
    for (uint32_t q = 0; q < nq; ++q) {
        c.measure_z(slot, q);
    }
    return out;
}

/// Ideal output distribution, indexed by bitstring with qubit q at bit q.
inline std::vector<double> ideal_probabilities(const Circuit &c) {
    StateVector sv(c.n_qubits());
    for (size_t i = 0; i < c.size(); ++i) {
        const auto &in = c[i];
        if (in.op == OpCode::Rot || in.op == OpCode::CZ) {
            sv.apply(in);
        }
    }
    return sv.probabilities();
}

struct XebResult {
    double fidelity = 0;
    size_t samples = 0;
    double std_err = 0;  // 1 / sqrt(samples)
};

/// F = 2^n <P(x_i)> - 1.
inline XebResult xeb_fidelity(const std::vector<uint64_t> &samples, const std::vector<double> &ideal, size_t n) {
    if (samples.empty()) {
        throw DataError("XEB needs at least one sample");
    }
    if (ideal.size() != (size_t{1} << n)) {
        throw ConfigError("ideal table size does not match the qubit count");
    }
    double norm = 0;
    for (double p : ideal) {
        norm += p;
    }
    if (std::abs(norm - 1) > 1e-8) {
        throw DataError("ideal probability table is not normalized");
    }
    double s = 0;
    for (uint64_t x : samples) {
        if (x >= ideal.size()) {
            throw DataError("sample outside the ideal table");
        }
        s += ideal[x];
    }
    XebResult r;
    r.samples = samples.size();
    r.fidelity = std::ldexp(s / static_cast<double>(samples.size()), static_cast<int>(n)) - 1;
    r.std_err = 1 / std::sqrt(static_cast<double>(samples.size()));
    return r;
}

/// Product of (1 - error probability) over every noise channel instance of
/// the noisy circuit: gates, idles and readouts.
inline double predicted_fidelity(const Circuit &noisy, const NoiseModel &model) {
    double f = 1;
    for (size_t i = 0; i < noisy.size(); ++i) {
        const auto &in = noisy[i];
        if (in.op == OpCode::Noise) {
            f *= 1 - model.at(in.channel).error_probability();
        }
    }
    return f;
}

inline double predicted_fidelity(const CalibrationTable &cal, const Circuit &c, const NoiseOptions &opts = {}) {
    const auto nc = attach_noise(c, cal, opts);
    return predicted_fidelity(nc.circuit, nc.model);
}

// ---- Noisy sampling -------------------------------------------------------------------

struct XebOptions {
    size_t samples = 100000;
    size_t trajectories = 128;
    size_t workers = 1;
};

struct NoisyXebResult {
    XebResult xeb;
    double predicted = 0;
    double p_clean = 1;           // probability of a fault-free gate/idle trajectory
    size_t trajectories = 0;
    double trajectory_std_err = 0;  // spread of faulted-trajectory estimates
};

namespace detail {

/// Applies per-qubit readout confusion to a distribution in place.
inline void apply_readout(std::vector<double> &p, const std::vector<ReadoutFlip> &flips) {
    for (size_t q = 0; q < flips.size(); ++q) {
        const size_t m = size_t{1} << q;
        const double p01 = flips[q].p01, p10 = flips[q].p10;
        if (p01 == 0 && p10 == 0) {
            continue;
        }
        for (size_t x = 0; x < p.size(); ++x) {
            if (x & m) {
                continue;
            }
            const double a = p[x], b = p[x | m];
            p[x] = a * (1 - p01) + b * p10;
            p[x | m] = a * p01 + b * (1 - p10);
        }
    }
}

/// Draws `k` outcomes from `p` and returns the sum of ideal[x].
inline double sample_sum(const std::vector<double> &p, const std::vector<double> &ideal, size_t k, RngStream &rng) {
    std::vector<double> cdf(p.size());
    double acc = 0;
    for (size_t x = 0; x < p.size(); ++x) {
        acc += p[x];
        cdf[x] = acc;
    }
    double s = 0;
    for (size_t i = 0; i < k; ++i) {
        const double u = rng.uniform() * acc;
        const size_t x = static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        s += ideal[std::min(x, p.size() - 1)];
    }
    return s;
}

}  // namespace detail

/// Noisy XEB by Pauli-injection trajectories on the statevector. Trajectories
/// are stratified on "no gate or idle fault": that stratum is the ideal
/// distribution and carries weight p_clean; the rest are drawn conditioned on
/// at least one fault. Each trajectory's output (after readout confusion) is
/// sampled K times, and the stratum means are combined with their weights.
inline NoisyXebResult noisy_xeb(const RandomCircuit &rc, const CalibrationTable &cal, uint64_t seed,
                                const XebOptions &opts = {}, const NoiseOptions &nopts = {}) {
    if (opts.samples == 0 || opts.trajectories == 0) {
        throw ConfigError("XEB needs positive sample and trajectory counts");
    }
    const auto nc = attach_noise(rc.circuit, cal, nopts);
    const Circuit &c = nc.circuit;
    const size_t n = c.n_qubits();
    const auto ideal = ideal_probabilities(rc.circuit);

    // Gate/idle noise sites in order, and readout confusion per qubit.
    std::vector<size_t> sites;
    std::vector<double> site_p;
    std::vector<ReadoutFlip> readout(n);
    double p_clean = 1;
    for (size_t i = 0; i < c.size(); ++i) {
        const auto &in = c[i];
        if (in.op != OpCode::Noise) {
            continue;
        }
        const auto &ch = nc.model.at(in.channel);
        if (ch.is_readout()) {
            readout[in.q0] = ch.readout;
            continue;
        }
        const double p = ch.pauli.total();
        if (p > 0) {
            sites.push_back(i);
            site_p.push_back(p);
            p_clean *= 1 - p;
        }
    }
    // P(first fault at site j) is proportional to prod_{i<j}(1 - p_i) p_j.
    std::vector<double> first_cdf(sites.size());
    double survive = 1, acc = 0;
    for (size_t j = 0; j < sites.size(); ++j) {
        acc += survive * site_p[j];
        first_cdf[j] = acc;
        survive *= 1 - site_p[j];
    }

    NoisyXebResult out;
    out.predicted = predicted_fidelity(c, nc.model);
    out.p_clean = p_clean;
    const double scale = std::ldexp(1.0, static_cast<int>(n));

    const bool faulty = !sites.empty() && p_clean < 1;
    const size_t n_clean = faulty ? std::min(opts.samples - 1, static_cast<size_t>(std::llround(
                                                                   static_cast<double>(opts.samples) * p_clean)))
                                  : opts.samples;
    const size_t n_faulty = opts.samples - n_clean;
    const size_t T = faulty ? std::min(opts.trajectories, n_faulty) : 0;

    double clean_mean = 0;
    if (n_clean > 0) {
        auto p = ideal;
        detail::apply_readout(p, readout);
        RngStream rng(seed, {kXebCleanStream});
        clean_mean = detail::sample_sum(p, ideal, n_clean, rng) / static_cast<double>(n_clean);
    }

    // Ideal state at the start of every slot: a trajectory matches the ideal
    // evolution up to its first fault, so it resumes from the nearest snapshot.
    std::vector<size_t> snap_at;
    std::vector<std::vector<cplx>> snaps;
    if (T > 0) {
        StateVector sv(n);
        for (size_t i = 0; i < c.size(); ++i) {
            if (i == 0 || c[i].slot != c[i - 1].slot) {
                snap_at.push_back(i);
                snaps.push_back(sv.amplitudes());
            }
            if (c[i].op == OpCode::Rot || c[i].op == OpCode::CZ) {
                sv.apply(c[i]);
            }
        }
    }

    std::vector<double> traj_sum(T, 0), traj_f(T, 0);
    std::vector<size_t> traj_k(T, 0);
    for (size_t t = 0; t < T; ++t) {
        traj_k[t] = n_faulty / T + (t < n_faulty % T ? 1 : 0);
    }
    detail::parallel_ranges(T, opts.workers, [&](size_t t0, size_t t1) {
        for (size_t t = t0; t < t1; ++t) {
            RngStream rng(seed, {kXebTrajectoryStream, t});
            const double u = rng.uniform() * acc;
            const size_t first = std::min<size_t>(
                static_cast<size_t>(std::upper_bound(first_cdf.begin(), first_cdf.end(), u) - first_cdf.begin()),
                sites.size() - 1);
            const size_t snap = static_cast<size_t>(
                std::upper_bound(snap_at.begin(), snap_at.end(), sites[first]) - snap_at.begin() - 1);
            StateVector sv(n);
            sv.amplitudes() = snaps[snap];
            size_t site = static_cast<size_t>(std::lower_bound(sites.begin(), sites.end(), snap_at[snap]) - sites.begin());
            for (size_t i = snap_at[snap]; i < c.size(); ++i) {
                const auto &in = c[i];
                if (in.op == OpCode::Rot || in.op == OpCode::CZ) {
                    sv.apply(in);
                    continue;
                }
                if (in.op != OpCode::Noise || site >= sites.size() || sites[site] != i) {
                    continue;
                }
                const auto &pc = nc.model.at(in.channel).pauli;
                uint32_t k = 0;
                if (site == first) {
                    // conditioned on a non-identity component
                    k = pc.pick(rng.uniform() * pc.total());
                    k = std::max<uint32_t>(k, 1);
                } else if (site > first) {
                    k = pc.pick(rng.uniform());
                }
                if (k != 0) {
                    detail::apply_component(sv, in.q0, k & 3);
                    if (in.arity == 2) {
                        detail::apply_component(sv, in.q1, (k >> 2) & 3);
                    }
                }
                ++site;
            }
            auto p = sv.probabilities();
            detail::apply_readout(p, readout);
            double exact = 0;
            for (size_t x = 0; x < p.size(); ++x) {
                exact += p[x] * ideal[x];
            }
            traj_f[t] = scale * exact - 1;
            traj_sum[t] = detail::sample_sum(p, ideal, traj_k[t], rng);
        }
    });

    double faulty_mean = 0;
    double fm = 0, fv = 0;
    if (T > 0) {
        double s = 0;
        for (double v : traj_sum) {
            s += v;
        }
        faulty_mean = s / static_cast<double>(n_faulty);
        for (double f : traj_f) {
            fm += f;
        }
        fm /= static_cast<double>(T);
        for (double f : traj_f) {
            fv += (f - fm) * (f - fm);
        }
        fv = T > 1 ? fv / static_cast<double>(T - 1) : 0;
    }
    const double w_clean = faulty ? p_clean : 1.0;
    const double mean_p = w_clean * clean_mean + (1 - w_clean) * faulty_mean;
    out.xeb.fidelity = scale * mean_p - 1;
    out.xeb.samples = opts.samples;
    out.xeb.std_err = 1 / std::sqrt(static_cast<double>(opts.samples));
    out.trajectories = T;
    out.trajectory_std_err = T > 0 ? (1 - w_clean) * std::sqrt(fv / static_cast<double>(T)) : 0;
    return out;
}

/// Noiseless sampling straight from the ideal distribution.
inline std::vector<uint64_t> sample_ideal(const std::vector<double> &ideal, size_t count, uint64_t seed) {
    std::vector<double> cdf(ideal.size());
    double acc = 0;
    for (size_t x = 0; x < ideal.size(); ++x) {
        acc += ideal[x];
        cdf[x] = acc;
    }
    RngStream rng(seed, {kXebCleanStream});
    std::vector<uint64_t> out(count);
    for (auto &x : out) {
        const double u = rng.uniform() * acc;
        x = std::min<uint64_t>(static_cast<uint64_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                               ideal.size() - 1);
    }
    return out;
}

inline std::string xeb_to_csv(const std::vector<std::pair<uint64_t, NoisyXebResult>> &rows) {
    std::ostringstream out;
    out.precision(10);
    out << "seed,fidelity,stderr,samples,trajectories,trajectory_stderr,p_clean,predicted\n";
    for (const auto &[seed, r] : rows) {
        out << seed << ',' << r.xeb.fidelity << ',' << r.xeb.std_err << ',' << r.xeb.samples << ',' << r.trajectories
            << ',' << r.trajectory_std_err << ',' << r.p_clean << ',' << r.predicted << '\n';
    }
    return out.str();
}

}  // namespace surfacelab
