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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "surfacelab/detection.hpp"
#include "surfacelab/engine.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/matching.hpp"
#include "surfacelab/noise.hpp"

namespace surfacelab {

// ---- Fault enumeration -----------------------------------------------------------

/// Effect of one isolated fault: which detectors it flips and whether it
/// flips the logical observable.
struct FaultSignature {
    size_t instruction = 0;
    uint32_t component = 0;
    double probability = 0;
    std::vector<uint32_t> detectors;  // sorted detector ids
    bool logical = false;
};

/// Every (NOISE instruction, non-identity component) of the circuit with its
/// probability. Readout channels contribute one flip component whose
/// probability is the mean of p01 and p10.
inline std::vector<FaultSignature> fault_locations(const Circuit &c, const NoiseModel &model) {
    std::vector<FaultSignature> out;
    for (size_t i = 0; i < c.size(); ++i) {
        const auto &in = c[i];
        if (in.op != OpCode::Noise) {
            continue;
        }
        const auto &ch = model.at(in.channel);
        if (ch.is_readout()) {
            const double p = ch.readout.mean_error();
            if (p > 0) {
                out.push_back({i, 1, p, {}, false});
            }
            continue;
        }
        for (uint32_t k = 1; k < ch.pauli.components(); ++k) {
            if (ch.pauli.probs[k] > 0) {
                out.push_back({i, k, ch.pauli.probs[k], {}, false});
            }
        }
    }
    return out;
}

enum class FaultEngine { Tableau, Frame };

namespace detail {

inline void signature_from_bits(const std::vector<uint8_t> &bits, const std::vector<uint8_t> &ref_events,
                                uint8_t ref_logical, const DetectionContext &ctx, FaultSignature &f) {
    uint8_t lg = 0;
    const auto ev = detect_one(bits, ctx, &lg);
    f.detectors.clear();
    for (size_t d = 0; d < ev.size(); ++d) {
        if (ev[d] != ref_events[d]) {
            f.detectors.push_back(static_cast<uint32_t>(d));
        }
    }
    f.logical = lg != ref_logical;
}

/// 64 faults per pass: lane l carries fault l alone. Measurement flips are
/// relative to any noiseless execution, so no reference run is needed.
inline void frame_signatures(const Circuit &c, const NoiseModel &model, const DetectionContext &ctx,
                             std::vector<FaultSignature> &faults) {
    const size_t n = c.n_qubits();
    const std::vector<uint8_t> zeros(c.n_records(), 0);
    uint8_t zero_logical = 0;
    const auto zero_events = detect_one(zeros, ctx, &zero_logical);
    for (size_t base = 0; base < faults.size(); base += 64) {
        const size_t lanes = std::min<size_t>(64, faults.size() - base);
        std::vector<uint64_t> fx(n, 0), fz(n, 0), flips(c.n_records(), 0);
        // faults are in instruction order; walk both lists together
        size_t next = base;
        for (size_t i = 0; i < c.size(); ++i) {
            const auto &in = c[i];
            switch (in.op) {
                case OpCode::Rot:
                    if (in.angle != Angle::Half) {
                        if (in.axis == Axis::X) {
                            fx[in.q0] ^= fz[in.q0];
                        } else if (in.axis == Axis::Y) {
                            std::swap(fx[in.q0], fz[in.q0]);
                        } else {
                            throw ConfigError("fault enumeration needs a Clifford circuit");
                        }
                    }
                    break;
                case OpCode::CZ:
                    fz[in.q0] ^= fx[in.q1];
                    fz[in.q1] ^= fx[in.q0];
                    break;
                case OpCode::MeasureZ:
                    flips[in.record] = fx[in.q0];
                    break;
                case OpCode::Noise:
                    while (next < base + lanes && faults[next].instruction == i) {
                        const uint64_t m = uint64_t{1} << (next - base);
                        const uint32_t k = faults[next].component;
                        if (model.at(in.channel).is_readout()) {
                            flips[in.record] ^= m;
                        } else {
                            fx[in.q0] ^= (k & 1U) ? m : 0;
                            fz[in.q0] ^= (k & 2U) ? m : 0;
                            if (in.arity == 2) {
                                fx[in.q1] ^= (k & 4U) ? m : 0;
                                fz[in.q1] ^= (k & 8U) ? m : 0;
                            }
                        }
                        ++next;
                    }
                    break;
                case OpCode::Idle:
                    break;
            }
        }
        std::vector<uint8_t> bits(c.n_records());
        for (size_t l = 0; l < lanes; ++l) {
            for (size_t r = 0; r < bits.size(); ++r) {
                bits[r] = static_cast<uint8_t>((flips[r] >> l) & 1U);
            }
            signature_from_bits(bits, zero_events, zero_logical, ctx, faults[base + l]);
        }
    }
}

}  // namespace detail

/// Injects each fault alone into a noiseless run and records the detectors
/// it flips relative to the fault-free run. The tableau engine reuses one
/// measurement-randomness stream for every run, so only the fault differs;
/// the frame engine propagates the fault as a Pauli frame (64 at a time).
inline std::vector<FaultSignature> enumerate_faults(const Circuit &c, const NoiseModel &model,
                                                    const DetectionContext &ctx,
                                                    FaultEngine engine = FaultEngine::Frame, uint64_t seed = 0) {
    if (c.n_records() != ctx.records().total()) {
        throw ConfigError("circuit records do not match the detection context");
    }
    auto faults = fault_locations(c, model);
    if (engine == FaultEngine::Frame) {
        detail::frame_signatures(c, model, ctx, faults);
        return faults;
    }
    const auto ref = run_with_faults(c, &model, Engine::Tableau, seed, 0, {});
    uint8_t ref_logical = 0;
    const auto ref_events = detect_one(ref.bits, ctx, &ref_logical);
    for (auto &f : faults) {
        const auto rec = run_with_faults(c, &model, Engine::Tableau, seed, 0, {{f.instruction, f.component}});
        detail::signature_from_bits(rec.bits, ref_events, ref_logical, ctx, f);
    }
    return faults;
}

// ---- Detector graph ---------------------------------------------------------------

struct GraphEdge {
    uint32_t u = 0;
    uint32_t v = 0;  // == boundary node for boundary edges
    double p = 0;
    double weight = 0;
    bool logical = false;
};

inline double edge_weight(double p) { return std::log((1 - p) / p); }

/// XOR composition of independent mechanisms on the same edge.
inline double xor_probability(double p1, double p2) { return p1 * (1 - p2) + p2 * (1 - p1); }

struct DetectorGraph {
    DetectorIndex index;
    size_t n_detectors = 0;
    std::vector<GraphEdge> edges;
    std::vector<std::string> warnings;
    size_t decomposed = 0;             // hyperedges split into graph edges
    size_t dropped = 0;                // hyperedges that could not be split
    size_t undetectable_logical = 0;   // faults flipping the logical with no detector

    uint32_t boundary() const noexcept { return static_cast<uint32_t>(n_detectors); }
};

/// Likelihood: w = ln((1-p)/p). Unit: every edge weighs 1, so matching
/// minimizes the number of faults (the circuit-distance view).
enum class EdgeWeighting { Likelihood, Unit };

struct GraphOptions {
    /// Largest hyperedge (fired detectors) the greedy decomposition attempts.
    size_t max_hyperedge = 6;
    EdgeWeighting weighting = EdgeWeighting::Likelihood;
};

namespace detail {

using EdgeKey = std::pair<uint32_t, uint32_t>;

inline EdgeKey edge_key(const std::vector<uint32_t> &dets, uint32_t boundary) {
    if (dets.size() == 1) {
        return {dets[0], boundary};
    }
    return {std::min(dets[0], dets[1]), std::max(dets[0], dets[1])};
}

/// Splits `dets` into a set of known edges whose symmetric difference is
/// `dets` and whose logical flags XOR to `logical`. Greedy: repeatedly takes
/// the lowest remaining detector and tries to pair it with another remaining
/// detector, then with the boundary; backtracks on failure.
inline bool decompose(std::vector<uint32_t> dets, bool logical, const std::map<EdgeKey, std::array<double, 2>> &known,
                      uint32_t boundary, std::vector<std::pair<EdgeKey, bool>> &out) {
    if (dets.empty()) {
        return !logical;
    }
    const uint32_t a = dets[0];
    auto try_edge = [&](EdgeKey key, const std::vector<uint32_t> &rest) {
        auto it = known.find(key);
        if (it == known.end()) {
            return false;
        }
        for (int flag = 0; flag < 2; ++flag) {
            if (it->second[flag] <= 0) {
                continue;
            }
            out.push_back({key, flag != 0});
            if (decompose(rest, logical ^ (flag != 0), known, boundary, out)) {
                return true;
            }
            out.pop_back();
        }
        return false;
    };
    for (size_t j = 1; j < dets.size(); ++j) {
        std::vector<uint32_t> rest;
        for (size_t k = 1; k < dets.size(); ++k) {
            if (k != j) {
                rest.push_back(dets[k]);
            }
        }
        if (try_edge({a, dets[j]}, rest)) {
            return true;
        }
    }
    return try_edge({a, boundary}, std::vector<uint32_t>(dets.begin() + 1, dets.end()));
}

}  // namespace detail

/// Builds the matching graph from single-fault signatures. One- and
/// two-detector signatures become boundary and ordinary edges; identical
/// (edge, logical) mechanisms merge by XOR composition. Larger signatures are
/// decomposed into existing edges or dropped with a warning. When one edge
/// carries both logical flags the more likely one is kept.
inline DetectorGraph build_detector_graph(const std::vector<FaultSignature> &faults, const DetectorIndex &index,
                                          const GraphOptions &opts = {}) {
    if (faults.empty()) {
        throw DataError("cannot build a detector graph from an empty fault list");
    }
    DetectorGraph g;
    g.index = index;
    g.n_detectors = index.size();
    const uint32_t B = g.boundary();
    std::map<detail::EdgeKey, std::array<double, 2>> acc;  // [logical flag] -> p
    auto add = [&](detail::EdgeKey key, bool flag, double p) {
        auto &slot = acc[key];
        slot[flag] = xor_probability(slot[flag], p);
    };
    for (const auto &f : faults) {
        if (f.detectors.empty()) {
            g.undetectable_logical += f.logical ? 1 : 0;
            continue;
        }
        if (f.detectors.size() <= 2) {
            add(detail::edge_key(f.detectors, B), f.logical, f.probability);
        }
    }
    const auto known = acc;
    for (const auto &f : faults) {
        if (f.detectors.size() <= 2) {
            continue;
        }
        std::vector<std::pair<detail::EdgeKey, bool>> parts;
        if (f.detectors.size() <= opts.max_hyperedge && detail::decompose(f.detectors, f.logical, known, B, parts)) {
            for (const auto &[key, flag] : parts) {
                add(key, flag, f.probability);
            }
            ++g.decomposed;
        } else {
            ++g.dropped;
            std::ostringstream msg;
            msg << "dropped fault at instruction " << f.instruction << " component " << f.component << " firing "
                << f.detectors.size() << " detectors";
            g.warnings.push_back(msg.str());
        }
    }
    for (const auto &[key, ps] : acc) {
        int flag = ps[1] > ps[0] ? 1 : 0;
        if (ps[0] > 0 && ps[1] > 0) {
            std::ostringstream msg;
            msg << "edge " << key.first << "-" << (key.second == B ? std::string("boundary") : std::to_string(key.second))
                << " has mechanisms with both logical flags; kept the "
                << (flag ? "flipping" : "non-flipping") << " one";
            g.warnings.push_back(msg.str());
        }
        const double p = ps[flag];
        if (!(p > 0)) {
            continue;
        }
        if (p >= 0.5) {
            std::ostringstream msg;
            msg << "edge " << key.first << "-" << key.second << " rejected with p = " << p;
            g.warnings.push_back(msg.str());
            continue;
        }
        const double w = opts.weighting == EdgeWeighting::Unit ? 1.0 : edge_weight(p);
        g.edges.push_back({key.first, key.second, p, w, flag != 0});
    }
    return g;
}

inline nlohmann::json graph_to_json(const DetectorGraph &g) {
    nlohmann::json j;
    j["rounds"] = g.index.rounds;
    nlohmann::json nodes = nlohmann::json::array();
    for (size_t d = 0; d < g.n_detectors; ++d) {
        nodes.push_back({{"id", d}, {"ancilla", g.index.names[g.index.ancilla_pos(d)]},
                         {"round", g.index.round(d) + 1}});
    }
    j["nodes"] = nodes;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto &e : g.edges) {
        nlohmann::json je;
        je["u"] = e.u;
        if (e.v == g.boundary()) {
            je["v"] = "boundary";
        } else {
            je["v"] = e.v;
        }
        je["p"] = e.p;
        je["weight"] = e.weight;
        je["logical_flip"] = e.logical;
        edges.push_back(je);
    }
    j["edges"] = edges;
    j["warnings"] = g.warnings;
    return j;
}

inline DetectorGraph graph_from_json(const nlohmann::json &j) {
    try {
        DetectorGraph g;
        g.index.rounds = j.at("rounds").get<size_t>();
        const auto &nodes = j.at("nodes");
        if (g.index.rounds == 0 || nodes.size() % g.index.rounds != 0) {
            throw DataError("graph nodes do not tile the round count");
        }
        for (size_t d = 0; d < nodes.size(); d += g.index.rounds) {
            g.index.names.push_back(nodes[d].at("ancilla").get<std::string>());
            g.index.ancillas.push_back(static_cast<uint32_t>(g.index.ancillas.size()));
        }
        g.n_detectors = nodes.size();
        for (const auto &je : j.at("edges")) {
            GraphEdge e;
            e.u = je.at("u").get<uint32_t>();
            e.v = je.at("v").is_string() ? g.boundary() : je.at("v").get<uint32_t>();
            e.p = je.at("p").get<double>();
            e.logical = je.at("logical_flip").get<bool>();
            if (e.u >= g.n_detectors || e.v > g.n_detectors || !(e.p > 0 && e.p < 0.5)) {
                throw DataError("graph edge out of range");
            }
            e.weight = edge_weight(e.p);
            g.edges.push_back(e);
        }
        return g;
    } catch (const nlohmann::json::exception &ex) {
        throw DataError(std::string("malformed detector graph: ") + ex.what());
    }
}

/// Re-estimates ordinary edge probabilities from measured pair statistics,
/// p_ij = 1/2 - 1/2 sqrt(1 - 4 (<x_i x_j> - <x_i><x_j>) / (1 - 2<x_i> - 2<x_j> + 4<x_i x_j>)),
/// keeping the structure and logical flags of `g`. Edges whose estimate is not
/// in (0, 1/2) keep their previous value.
inline DetectorGraph reweight_from_correlations(DetectorGraph g, const EventStats &st) {
    if (st.n_detectors != g.n_detectors || st.shots == 0) {
        throw DataError("event statistics do not match the detector graph");
    }
    const double N = static_cast<double>(st.shots);
    for (auto &e : g.edges) {
        if (e.v == g.boundary()) {
            continue;
        }
        const double xi = st.count[e.u] / N, xj = st.count[e.v] / N;
        const size_t a = std::min(e.u, e.v), b = std::max(e.u, e.v);
        const double xij = st.pair[a * st.n_detectors + b] / N;
        const double den = 1 - 2 * xi - 2 * xj + 4 * xij;
        if (den <= 0) {
            continue;
        }
        const double arg = 1 - 4 * (xij - xi * xj) / den;
        if (arg < 0) {
            continue;
        }
        const double p = 0.5 - 0.5 * std::sqrt(arg);
        if (p > 0 && p < 0.5) {
            e.p = p;
            e.weight = edge_weight(p);
        }
    }
    return g;
}

// ---- Matching decoder ------------------------------------------------------------------

struct Matching {
    /// Matched pairs; the second member is the boundary node for boundary matches.
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    int64_t weight = 0;        // integer-scaled
    double real_weight = 0;    // in log-likelihood units
    bool logical = false;      // parity of logical flags along the matched paths
};

/// All-pairs shortest paths over the detector graph plus exact minimum-weight
/// perfect matching of fired detectors. Immutable after construction; decode
/// calls may run concurrently.
class MatchingDecoder {
public:
    static constexpr double kScale = 1 << 20;  // weight quantum for integer matching

    explicit MatchingDecoder(const DetectorGraph &g) : n_(g.n_detectors), index_(g.index) {
        const size_t N = n_ + 1;
        const int64_t inf = std::numeric_limits<int64_t>::max() / 4;
        dist_.assign(N * N, inf);
        flip_.assign(N * N, 0);
        for (size_t i = 0; i < N; ++i) {
            dist_[i * N + i] = 0;
        }
        for (const auto &e : g.edges) {
            const auto w = static_cast<int64_t>(std::llround(e.weight * kScale));
            if (w < 0) {
                throw DataError("negative edge weight");
            }
            auto relax = [&](size_t a, size_t b) {
                if (w < dist_[a * N + b]) {
                    dist_[a * N + b] = w;
                    flip_[a * N + b] = e.logical;
                }
            };
            relax(e.u, e.v);
            relax(e.v, e.u);
        }
        for (size_t k = 0; k < N; ++k) {
            for (size_t i = 0; i < N; ++i) {
                const int64_t dik = dist_[i * N + k];
                if (dik >= inf) {
                    continue;
                }
                for (size_t j = 0; j < N; ++j) {
                    const int64_t cand = dik + dist_[k * N + j];
                    if (cand < dist_[i * N + j]) {
                        dist_[i * N + j] = cand;
                        flip_[i * N + j] = flip_[i * N + k] ^ flip_[k * N + j];
                    }
                }
            }
        }
        for (size_t i = 0; i < n_; ++i) {
            if (dist_[i * N + n_] >= inf) {
                unreachable_.push_back(static_cast<uint32_t>(i));
            }
        }
    }

    size_t n_detectors() const noexcept { return n_; }
    uint32_t boundary() const noexcept { return static_cast<uint32_t>(n_); }
    const DetectorIndex &index() const noexcept { return index_; }

    /// Detectors with no path to the boundary (empty for a valid graph).
    const std::vector<uint32_t> &unreachable() const noexcept { return unreachable_; }

    int64_t distance(uint32_t a, uint32_t b) const { return dist_[a * (n_ + 1) + b]; }
    bool path_flip(uint32_t a, uint32_t b) const { return flip_[a * (n_ + 1) + b] != 0; }

    /// Exact minimum-weight perfect matching over the fired detectors, each of
    /// which may instead match its own boundary image (images pair among
    /// themselves at zero cost).
    Matching mwpm(const std::vector<uint32_t> &fired) const {
        Matching out;
        const int m = static_cast<int>(fired.size());
        if (m == 0) {
            return out;
        }
        for (uint32_t d : fired) {
            if (d >= n_) {
                throw ConfigError("fired detector id out of range");
            }
            if (distance(d, boundary()) >= std::numeric_limits<int64_t>::max() / 4) {
                throw DataError("detector " + index_.label(d) + " cannot reach the boundary");
            }
        }
        auto cost = [&](int a, int b) -> int64_t {
            if (a > b) {
                std::swap(a, b);
            }
            if (b < m) {
                return distance(fired[a], fired[b]);
            }
            if (a < m) {
                return b - m == a ? distance(fired[a], boundary()) : kNoEdge;
            }
            return 0;
        };
        const auto mate = min_weight_perfect_matching(2 * m, cost);
        for (int a = 0; a < m; ++a) {
            const int b = mate[a];
            if (b < m && b < a) {
                continue;
            }
            const uint32_t u = fired[a];
            const uint32_t v = b < m ? fired[b] : boundary();
            out.pairs.push_back({u, v});
            out.weight += distance(u, v);
            out.logical ^= path_flip(u, v);
        }
        out.real_weight = static_cast<double>(out.weight) / kScale;
        return out;
    }

    /// Corrected logical value of one shot.
    uint8_t decode(const uint8_t *events, uint8_t raw_logical) const {
        std::vector<uint32_t> fired;
        for (size_t d = 0; d < n_; ++d) {
            if (events[d]) {
                fired.push_back(static_cast<uint32_t>(d));
            }
        }
        return static_cast<uint8_t>(raw_logical ^ (mwpm(fired).logical ? 1 : 0));
    }

private:
    // Costs above every real path keep detector-to-foreign-image pairs unused.
    static constexpr int64_t kNoEdge = int64_t{1} << 50;

    size_t n_;
    DetectorIndex index_;
    std::vector<int64_t> dist_;
    std::vector<uint8_t> flip_;
    std::vector<uint32_t> unreachable_;
};

/// Decodes every shot; syndromes are cached when they fit in 64 bits.
inline std::vector<uint8_t> decode_all(const DetectionMatrix &m, const MatchingDecoder &dec, size_t workers = 1) {
    if (m.index.size() != dec.n_detectors()) {
        throw ConfigError("detection matrix and decoder disagree on the detector count");
    }
    std::vector<uint8_t> out(m.n_shots, 0);
    const size_t n = m.index.size();
    detail::parallel_ranges(m.n_shots, workers, [&](size_t s0, size_t s1) {
        std::unordered_map<uint64_t, uint8_t> cache;
        for (size_t s = s0; s < s1; ++s) {
            const uint8_t *row = m.row(s);
            if (n <= 64) {
                uint64_t key = 0;
                for (size_t d = 0; d < n; ++d) {
                    key |= static_cast<uint64_t>(row[d]) << d;
                }
                auto it = cache.find(key);
                if (it == cache.end()) {
                    it = cache.emplace(key, dec.decode(row, 0)).first;
                }
                out[s] = m.raw_logical[s] ^ it->second;
            } else {
                out[s] = dec.decode(row, m.raw_logical[s]);
            }
        }
    });
    return out;
}

inline std::string decode_to_csv(const DetectionMatrix &m, const std::vector<uint8_t> &corrected) {
    std::ostringstream out;
    out << "shot,raw,corrected\n";
    for (size_t s = 0; s < m.n_shots; ++s) {
        out << s << ',' << int(m.raw_logical[s]) << ',' << int(corrected[s]) << '\n';
    }
    return out.str();
}

/// Reference minimum over all perfect matchings (each fired detector pairs
/// with another or with the boundary). Exponential; for tests and audits.
inline int64_t brute_force_min_weight(const MatchingDecoder &dec, std::vector<uint32_t> fired) {
    if (fired.empty()) {
        return 0;
    }
    const uint32_t a = fired.back();
    fired.pop_back();
    int64_t best = dec.distance(a, dec.boundary()) + brute_force_min_weight(dec, fired);
    for (size_t j = 0; j < fired.size(); ++j) {
        auto rest = fired;
        const uint32_t b = rest[j];
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
        best = std::min(best, dec.distance(a, b) + brute_force_min_weight(dec, rest));
    }
    return best;
}

}  // namespace surfacelab
