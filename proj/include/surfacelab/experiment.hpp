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
#include <string>
#include <vector>

#include "surfacelab/analysis.hpp"
#include "surfacelab/calibration.hpp"
#include "surfacelab/decoder.hpp"
#include "surfacelab/detection.hpp"
#include "surfacelab/engine.hpp"
#include "surfacelab/layout.hpp"
#include "surfacelab/memory.hpp"
#include "surfacelab/noise.hpp"

namespace surfacelab {

inline constexpr uint64_t kMemoryPointStream = 0x3E3;

/// Logical value a noiseless run of the memory circuit produces, from one
/// statevector shot. Deterministic for both bases (asserted).
inline uint8_t logical_target(const CodeLayout &L, Basis basis, size_t n_cycles, const Durations &dur = {}) {
    const auto mc = build_memory_circuit(L, basis, n_cycles, dur);
    DetectionContext ctx(L, mc.records, basis);
    uint8_t first = 0;
    for (uint64_t s = 0; s < 2; ++s) {
        const auto rec = run_with_faults(mc.circuit, nullptr, Engine::StateVector, s, 0, {});
        uint8_t lg = 0;
        detect_one(rec.bits, ctx, &lg);
        if (s == 0) {
            first = lg;
        } else if (lg != first) {
            throw DataError("noiseless logical value is not deterministic");
        }
    }
    return first;
}

/// Seed used for the k-cycle point of a multi-point run.
inline uint64_t point_seed(uint64_t seed, Basis basis, size_t n_cycles) {
    return derive_key(seed, {kMemoryPointStream, static_cast<uint64_t>(basis), n_cycles});
}

struct MemoryPoint {
    size_t n_cycles = 0;
    Basis basis = Basis::Z;
    uint8_t target = 0;
    DetectionMatrix detections;
    std::vector<uint8_t> corrected;
    size_t graph_warnings = 0;
};

struct MemoryRunOptions {
    RunOptions run{Engine::Frame};
    NoiseOptions noise;
    GraphOptions graph;
    bool noiseless = false;
};

/// Memory circuit of `n_cycles` cycles with noise attached.
inline NoisyCircuit noisy_memory_circuit(const CodeLayout &L, const CalibrationTable &cal, Basis basis,
                                         size_t n_cycles, const NoiseOptions &nopts = {}) {
    const auto mc = build_memory_circuit(L, basis, n_cycles, cal.durations);
    return attach_noise(mc.circuit, cal, nopts);
}

/// Detects and decodes existing shots of the `n_cycles` memory circuit.
inline MemoryPoint analyze_memory_shots(const CodeLayout &L, const CalibrationTable &cal, Basis basis,
                                        size_t n_cycles, const ShotBatch &shots, const MemoryRunOptions &opts = {}) {
    MemoryPoint pt;
    pt.n_cycles = n_cycles;
    pt.basis = basis;
    pt.target = logical_target(L, basis, n_cycles, cal.durations);
    const auto mc = build_memory_circuit(L, basis, n_cycles, cal.durations);
    const auto nc = attach_noise(mc.circuit, cal, opts.noise);
    DetectionContext ctx(L, mc.records, basis);
    pt.detections = detect(shots, ctx);
    const auto faults = enumerate_faults(nc.circuit, nc.model, ctx);
    bool any_fault = false;
    for (const auto &f : faults) {
        any_fault = any_fault || !f.detectors.empty();
    }
    if (!any_fault) {
        pt.corrected = pt.detections.raw_logical;
        return pt;
    }
    const auto g = build_detector_graph(faults, ctx.index(), opts.graph);
    pt.graph_warnings = g.warnings.size();
    MatchingDecoder dec(g);
    pt.corrected = decode_all(pt.detections, dec, opts.run.workers);
    return pt;
}

/// Simulates, detects and decodes one cycle count.
inline MemoryPoint run_memory_point(const CodeLayout &L, const CalibrationTable &cal, Basis basis, size_t n_cycles,
                                    size_t shots, uint64_t seed, const MemoryRunOptions &opts = {}) {
    const auto nc = noisy_memory_circuit(L, cal, basis, n_cycles, opts.noise);
    RunOptions ro = opts.run;
    ro.noiseless = opts.noiseless;
    const auto sh = run_circuit(nc.circuit, &nc.model, shots, seed, ro);
    return analyze_memory_shots(L, cal, basis, n_cycles, sh, opts);
}

/// Raw curves for every post-selection scheme plus the decoded curve.
inline std::vector<FidelityCurve> memory_curves(const std::vector<MemoryPoint> &points, Interval iv = Interval::Wald) {
    std::vector<FidelityCurve> out;
    for (auto scheme : kAllSchemes) {
        FidelityCurve c{scheme_name(scheme), iv, {}};
        for (const auto &pt : points) {
            const auto keep = postselect(pt.detections, scheme);
            c.points.push_back(fidelity_point(pt.n_cycles, pt.detections.raw_logical, keep, pt.target, iv));
        }
        out.push_back(std::move(c));
    }
    FidelityCurve dec{"decoded", iv, {}};
    for (const auto &pt : points) {
        dec.points.push_back(fidelity_point(pt.n_cycles, pt.corrected, {}, pt.target, iv));
    }
    out.push_back(std::move(dec));
    return out;
}

}  // namespace surfacelab
