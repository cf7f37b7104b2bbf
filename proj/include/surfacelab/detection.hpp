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

#include "json.hpp"

#include "surfacelab/engine.hpp"
#include "surfacelab/errors.hpp"
#include "surfacelab/layout.hpp"
#include "surfacelab/memory.hpp"

namespace surfacelab {

// ---- Per-ancilla primitives ---------------------------------------------------

/// XOR chain over one ancilla's raw readings: v1 = m1, v_k = m_k ^ m_{k-1}.
/// Without ancilla reset each reading carries the previous one, so v_k is the
/// plaquette parity seen in round k.
inline std::vector<uint8_t> stabilizer_values_from_readings(const std::vector<uint8_t> &m) {
    std::vector<uint8_t> v(m.size());
    for (size_t k = 0; k < m.size(); ++k) {
        v[k] = static_cast<uint8_t>((m[k] ^ (k ? m[k - 1] : 0)) & 1U);
    }
    return v;
}

/// Inverse of stabilizer_values_from_readings.
inline std::vector<uint8_t> readings_from_stabilizer_values(const std::vector<uint8_t> &v) {
    std::vector<uint8_t> m(v.size());
    for (size_t k = 0; k < v.size(); ++k) {
        m[k] = static_cast<uint8_t>((v[k] ^ (k ? m[k - 1] : 0)) & 1U);
    }
    return m;
}

/// e_1 = v_1 ^ expected, e_r = v_r ^ v_{r-1}.
inline std::vector<uint8_t> detection_events(const std::vector<uint8_t> &v, uint8_t expected_first = 0) {
    std::vector<uint8_t> e(v.size());
    for (size_t r = 0; r < v.size(); ++r) {
        e[r] = static_cast<uint8_t>((v[r] ^ (r ? v[r - 1] : expected_first)) & 1U);
    }
    return e;
}

// ---- Memory-experiment detection ------------------------------------------------

struct DetectionOptions {
    /// Also report ancillas whose type does not match the basis (their first
    /// round is random and their final column carries no data comparison).
    bool include_inconsistent = false;
    /// Expected first-round stabilizer value per layout ancilla; empty = all zero.
    std::vector<uint8_t> expected_first;
};

/// Detector numbering: the k-th reported ancilla in round r (0-based, up to
/// n_cycles inclusive) has id k * rounds + r.
struct DetectorIndex {
    std::vector<uint32_t> ancillas;  // layout ancilla indices
    std::vector<std::string> names;
    size_t rounds = 0;               // n_cycles + 1

    size_t size() const noexcept { return ancillas.size() * rounds; }
    size_t id(size_t k, size_t round) const noexcept { return k * rounds + round; }
    size_t ancilla_pos(size_t det) const noexcept { return det / rounds; }
    size_t round(size_t det) const noexcept { return det % rounds; }
    std::string label(size_t det) const { return names[ancilla_pos(det)] + "@" + std::to_string(round(det) + 1); }
};

/// Everything needed to turn one shot's record bits into stabilizer values,
/// detection events and the raw logical value.
class DetectionContext {
public:
    DetectionContext(const CodeLayout &layout, const RecordMap &records, Basis basis, const DetectionOptions &opts = {})
        : layout_(layout), records_(records), basis_(basis) {
        if (records.n_ancillas != layout.n_ancillas() || records.n_data != layout.n_data()) {
            throw ConfigError("record map does not match the layout");
        }
        if (!opts.expected_first.empty() && opts.expected_first.size() != layout.n_ancillas()) {
            throw ConfigError("expected first-round values need one entry per ancilla");
        }
        index_.rounds = records.n_cycles + 1;
        for (size_t a = 0; a < layout.n_ancillas(); ++a) {
            const bool consistent = layout.ancillas[a].type == consistent_type(basis);
            if (consistent || opts.include_inconsistent) {
                index_.ancillas.push_back(static_cast<uint32_t>(a));
                index_.names.push_back(layout.ancillas[a].name);
                consistent_.push_back(consistent ? 1 : 0);
                expected_.push_back(opts.expected_first.empty() ? 0 : opts.expected_first[a] & 1U);
            }
        }
        logical_ = basis == Basis::Z ? layout.logical_z : layout.logical_x;
    }

    const DetectorIndex &index() const noexcept { return index_; }
    const RecordMap &records() const noexcept { return records_; }
    const CodeLayout &layout() const noexcept { return layout_; }
    Basis basis() const noexcept { return basis_; }
    size_t n_cycles() const noexcept { return records_.n_cycles; }

    /// Stabilizer values of the k-th reported ancilla: n_cycles + 1 columns,
    /// the last being the data-qubit parity of the plaquette (for
    /// basis-inconsistent ancillas it repeats the last ancilla value).
    template <class Bits>
    void stabilizer_values(const Bits &bit, size_t k, std::vector<uint8_t> &v) const {
        const size_t a = index_.ancillas[k];
        const size_t n = records_.n_cycles;
        v.resize(n + 1);
        uint8_t prev = 0;
        for (size_t r = 0; r < n; ++r) {
            const uint8_t m = bit(records_.ancilla(r, a)) & 1U;
            v[r] = m ^ prev;
            prev = m;
        }
        if (consistent_[k]) {
            uint8_t parity = 0;
            for (uint32_t q : layout_.ancillas[a].support) {
                parity ^= bit(records_.data(q)) & 1U;
            }
            v[n] = parity;
        } else {
            v[n] = v[n - 1];
        }
    }

    /// Fills `events` (size index().size()) and returns the raw logical value.
    template <class Bits>
    uint8_t events(const Bits &bit, uint8_t *events) const {
        std::vector<uint8_t> v;
        for (size_t k = 0; k < index_.ancillas.size(); ++k) {
            stabilizer_values(bit, k, v);
            for (size_t r = 0; r < v.size(); ++r) {
                events[index_.id(k, r)] = v[r] ^ (r ? v[r - 1] : expected_[k]);
            }
        }
        return raw_logical(bit);
    }

    template <class Bits>
    uint8_t raw_logical(const Bits &bit) const {
        uint8_t parity = 0;
        for (uint32_t q : logical_) {
            parity ^= bit(records_.data(q)) & 1U;
        }
        return parity;
    }

    /// Whether the k-th reported ancilla matches the experiment basis.
    bool is_consistent(size_t k) const noexcept { return consistent_[k] != 0; }

private:
    CodeLayout layout_;
    RecordMap records_;
    Basis basis_;
    DetectorIndex index_;
    std::vector<uint8_t> consistent_;
    std::vector<uint8_t> expected_;
    std::vector<uint32_t> logical_;
};

/// Detection events of every shot, row-major (shot, detector), plus each
/// shot's raw logical value.
struct DetectionMatrix {
    DetectorIndex index;
    size_t n_shots = 0;
    std::vector<uint8_t> events;
    std::vector<uint8_t> raw_logical;

    uint8_t event(size_t shot, size_t det) const noexcept { return events[shot * index.size() + det]; }
    const uint8_t *row(size_t shot) const noexcept { return events.data() + shot * index.size(); }

    size_t fired(size_t shot) const noexcept {
        size_t c = 0;
        for (size_t d = 0; d < index.size(); ++d) {
            c += event(shot, d);
        }
        return c;
    }

    /// Any event in rounds 1..n (ancilla-based detection).
    bool ancilla_flagged(size_t shot) const noexcept {
        for (size_t d = 0; d < index.size(); ++d) {
            if (event(shot, d) && index.round(d) + 1 < index.rounds) {
                return true;
            }
        }
        return false;
    }

    /// Any event in the final data-parity column.
    bool data_flagged(size_t shot) const noexcept {
        for (size_t k = 0; k < index.ancillas.size(); ++k) {
            if (event(shot, index.id(k, index.rounds - 1))) {
                return true;
            }
        }
        return false;
    }
};

inline DetectionMatrix detect(const ShotBatch &shots, const DetectionContext &ctx) {
    if (shots.n_measurements() != ctx.records().total()) {
        throw DataError("shot length " + std::to_string(shots.n_measurements()) + " does not match the " +
                        std::to_string(ctx.records().total()) + " records of the memory circuit");
    }
    DetectionMatrix out;
    out.index = ctx.index();
    out.n_shots = shots.n_shots();
    out.events.assign(out.n_shots * out.index.size(), 0);
    out.raw_logical.assign(out.n_shots, 0);
    for (size_t s = 0; s < out.n_shots; ++s) {
        const uint8_t *row = shots.row(s);
        auto bit = [row](size_t m) -> uint8_t { return (row[m >> 3] >> (m & 7)) & 1U; };
        out.raw_logical[s] = ctx.events(bit, out.events.data() + s * out.index.size());
    }
    return out;
}

/// Events of a single unpacked shot.
inline std::vector<uint8_t> detect_one(const std::vector<uint8_t> &bits, const DetectionContext &ctx,
                                       uint8_t *raw_logical = nullptr) {
    if (bits.size() != ctx.records().total()) {
        throw DataError("shot length does not match the memory circuit");
    }
    std::vector<uint8_t> ev(ctx.index().size());
    auto bit = [&bits](size_t m) -> uint8_t { return bits[m]; };
    const uint8_t lg = ctx.events(bit, ev.data());
    if (raw_logical) {
        *raw_logical = lg;
    }
    return ev;
}

// ---- Aggregates ---------------------------------------------------------------------

/// Event and pair counts. Merging is associative and commutative, so shards
/// can be accumulated independently.
struct EventStats {
    size_t n_detectors = 0;
    size_t shots = 0;
    std::vector<uint64_t> count;  // n
    std::vector<uint64_t> pair;   // n * n, upper triangle used

    explicit EventStats(size_t n = 0) : n_detectors(n), count(n, 0), pair(n * n, 0) {}

    void add(const uint8_t *row) {
        ++shots;
        for (size_t i = 0; i < n_detectors; ++i) {
            if (!row[i]) {
                continue;
            }
            ++count[i];
            for (size_t j = i; j < n_detectors; ++j) {
                pair[i * n_detectors + j] += row[j];
            }
        }
    }

    void merge(const EventStats &o) {
        if (o.n_detectors != n_detectors) {
            throw ConfigError("cannot merge statistics of different detector sets");
        }
        shots += o.shots;
        for (size_t i = 0; i < count.size(); ++i) {
            count[i] += o.count[i];
        }
        for (size_t i = 0; i < pair.size(); ++i) {
            pair[i] += o.pair[i];
        }
    }
};

inline EventStats event_stats(const DetectionMatrix &m) {
    EventStats st(m.index.size());
    for (size_t s = 0; s < m.n_shots; ++s) {
        st.add(m.row(s));
    }
    return st;
}

/// Detection-event fraction per detector.
struct DEFSeries {
    DetectorIndex index;
    size_t shots = 0;
    std::vector<double> fraction;  // by detector id

    double at(size_t k, size_t round) const { return fraction[index.id(k, round)]; }

    /// Binomial standard error of one entry.
    double stderr_at(size_t det) const {
        const double p = fraction[det];
        return std::sqrt(p * (1 - p) / static_cast<double>(shots));
    }

    /// Mean over ancillas and rounds 2..n (the rounds between the first and
    /// the data-parity column).
    double mid_round_mean() const {
        double s = 0;
        size_t n = 0;
        for (size_t k = 0; k < index.ancillas.size(); ++k) {
            for (size_t r = 1; r + 1 < index.rounds; ++r) {
                s += at(k, r);
                ++n;
            }
        }
        return n ? s / static_cast<double>(n) : 0.0;
    }

    double ancilla_mid_round_mean(size_t k) const {
        double s = 0;
        size_t n = 0;
        for (size_t r = 1; r + 1 < index.rounds; ++r) {
            s += at(k, r);
            ++n;
        }
        return n ? s / static_cast<double>(n) : 0.0;
    }
};

inline DEFSeries def_curve(const DetectorIndex &index, const EventStats &st) {
    if (st.shots == 0) {
        throw DataError("detection-event fraction needs at least one shot");
    }
    DEFSeries out;
    out.index = index;
    out.shots = st.shots;
    out.fraction.resize(st.n_detectors);
    for (size_t i = 0; i < st.n_detectors; ++i) {
        out.fraction[i] = static_cast<double>(st.count[i]) / static_cast<double>(st.shots);
    }
    return out;
}

inline DEFSeries def_curve(const DetectionMatrix &m) { return def_curve(m.index, event_stats(m)); }

/// Pearson correlation of detection indicators minus the identity:
/// p_ij = (<x_i x_j> - <x_i><x_j>) / sqrt(Var_i Var_j) - delta_ij.
/// Pairs with a zero-variance member are 0.
struct CorrelationMatrix {
    DetectorIndex index;
    size_t shots = 0;
    std::vector<double> values;  // n * n

    size_t size() const noexcept { return index.size(); }
    double at(size_t i, size_t j) const { return values[i * size() + j]; }

    CorrelationMatrix clamped() const {
        CorrelationMatrix c = *this;
        for (auto &v : c.values) {
            v = std::max(0.0, v);
        }
        return c;
    }
};

inline CorrelationMatrix correlation_matrix(const DetectorIndex &index, const EventStats &st) {
    if (st.shots < 2) {
        throw DataError("correlation matrix needs at least two shots");
    }
    const size_t n = st.n_detectors;
    const double N = static_cast<double>(st.shots);
    CorrelationMatrix out;
    out.index = index;
    out.shots = st.shots;
    out.values.assign(n * n, 0.0);
    std::vector<double> mean(n), var(n);
    for (size_t i = 0; i < n; ++i) {
        mean[i] = static_cast<double>(st.count[i]) / N;
        var[i] = mean[i] * (1 - mean[i]);
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (var[i] <= 0 || var[j] <= 0) {
                continue;
            }
            const double xij = static_cast<double>(st.pair[i * n + j]) / N;
            double r = (xij - mean[i] * mean[j]) / std::sqrt(var[i] * var[j]);
            r = std::clamp(r, -1.0, 1.0);
            out.values[i * n + j] = out.values[j * n + i] = r;
        }
    }
    return out;
}

inline CorrelationMatrix correlation_matrix(const DetectionMatrix &m) {
    return correlation_matrix(m.index, event_stats(m));
}

// ---- Export ---------------------------------------------------------------------------

/// One row per ancilla, one column per round.
inline std::string def_to_csv(const DEFSeries &d) {
    std::ostringstream out;
    out.precision(10);
    out << "ancilla";
    for (size_t r = 0; r < d.index.rounds; ++r) {
        out << ",round" << r + 1;
    }
    out << ",shots\n";
    for (size_t k = 0; k < d.index.ancillas.size(); ++k) {
        out << d.index.names[k];
        for (size_t r = 0; r < d.index.rounds; ++r) {
            out << ',' << d.at(k, r);
        }
        out << ',' << d.shots << '\n';
    }
    return out.str();
}

inline nlohmann::json def_to_json(const DEFSeries &d) {
    nlohmann::json j;
    j["shots"] = d.shots;
    j["rounds"] = d.index.rounds;
    j["mid_round_mean"] = d.mid_round_mean();
    for (size_t k = 0; k < d.index.ancillas.size(); ++k) {
        nlohmann::json row = nlohmann::json::array();
        nlohmann::json err = nlohmann::json::array();
        for (size_t r = 0; r < d.index.rounds; ++r) {
            row.push_back(d.at(k, r));
            err.push_back(d.stderr_at(d.index.id(k, r)));
        }
        j["def"][d.index.names[k]] = row;
        j["stderr"][d.index.names[k]] = err;
    }
    return j;
}

inline std::string correlation_to_csv(const CorrelationMatrix &c) {
    std::ostringstream out;
    out.precision(10);
    out << "detector";
    for (size_t i = 0; i < c.size(); ++i) {
        out << ',' << c.index.label(i);
    }
    out << '\n';
    for (size_t i = 0; i < c.size(); ++i) {
        out << c.index.label(i);
        for (size_t j = 0; j < c.size(); ++j) {
            out << ',' << c.at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

inline nlohmann::json correlation_to_json(const CorrelationMatrix &c) {
    nlohmann::json j;
    j["shots"] = c.shots;
    nlohmann::json labels = nlohmann::json::array();
    for (size_t i = 0; i < c.size(); ++i) {
        labels.push_back(c.index.label(i));
    }
    j["labels"] = labels;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t i = 0; i < c.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t j2 = 0; j2 < c.size(); ++j2) {
            row.push_back(c.at(i, j2));
        }
        rows.push_back(row);
    }
    j["matrix"] = rows;
    return j;
}

}  // namespace surfacelab
