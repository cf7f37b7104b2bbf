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

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfacelab/errors.hpp"

namespace surfacelab {

struct QubitCalibration {
    std::string name;
    double t1_us = 0;
    double t2_echo_us = 0;
    double t2_star_us = std::numeric_limits<double>::quiet_NaN();  // ingested, unused by default
    double f00 = 1;
    double f11 = 1;
    double e1 = 0;  // average single-qubit gate error (XEB)
};

struct CzCalibration {
    char pattern = 'A';
    std::string a;
    std::string b;
    double e2 = 0;  // average CZ error (XEB)
};

struct Durations {
    double oneq_ns = 25;
    double twoq_ns = 32;
    double measure_ns = 1500;
    double depletion_ns = 2400;
};

/// Per-qubit and per-pair device parameters plus global gate durations.
class CalibrationTable {
public:
    std::vector<QubitCalibration> qubits;
    std::vector<CzCalibration> cz;
    Durations durations;

    const QubitCalibration *find_qubit(const std::string &name) const {
        for (const auto &q : qubits) {
            if (q.name == name) {
                return &q;
            }
        }
        return nullptr;
    }

    const QubitCalibration &qubit(const std::string &name) const {
        const auto *q = find_qubit(name);
        if (!q) {
            throw ConfigError("calibration has no qubit named " + name);
        }
        return *q;
    }

    /// CZ entry for an unordered pair, if present.
    const CzCalibration *find_pair(const std::string &a, const std::string &b) const {
        for (const auto &c : cz) {
            if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) {
                return &c;
            }
        }
        return nullptr;
    }

    std::optional<double> pattern_average(char pattern) const {
        double s = 0;
        int n = 0;
        for (const auto &c : cz) {
            if (c.pattern == pattern) {
                s += c.e2;
                ++n;
            }
        }
        if (n == 0) {
            return std::nullopt;
        }
        return s / n;
    }

    double average_e1() const { return mean([](const QubitCalibration &q) { return q.e1; }); }
    double average_t1() const { return mean([](const QubitCalibration &q) { return q.t1_us; }); }
    double average_t2() const { return mean([](const QubitCalibration &q) { return q.t2_echo_us; }); }
    double average_f00() const { return mean([](const QubitCalibration &q) { return q.f00; }); }
    double average_f11() const { return mean([](const QubitCalibration &q) { return q.f11; }); }

    double average_e2() const {
        if (cz.empty()) {
            return 0;
        }
        double s = 0;
        for (const auto &c : cz) {
            s += c.e2;
        }
        return s / static_cast<double>(cz.size());
    }

    /// Parameters for `name`, or a synthetic row of table averages when the
    /// qubit is not listed (larger-distance layouts).
    QubitCalibration qubit_or_average(const std::string &name) const {
        if (const auto *q = find_qubit(name)) {
            return *q;
        }
        QubitCalibration avg;
        avg.name = name;
        avg.t1_us = average_t1();
        avg.t2_echo_us = average_t2();
        avg.f00 = average_f00();
        avg.f11 = average_f11();
        avg.e1 = average_e1();
        return avg;
    }

    double best_t1_us() const {
        double best = 0;
        for (const auto &q : qubits) {
            best = std::max(best, q.t1_us);
        }
        return best;
    }

private:
    template <typename F>
    double mean(F f) const {
        if (qubits.empty()) {
            return 0;
        }
        double s = 0;
        for (const auto &q : qubits) {
            s += f(q);
        }
        return s / static_cast<double>(qubits.size());
    }
};

namespace detail {

inline double number_or_inf(const nlohmann::json &v, const std::string &where) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
        return std::numeric_limits<double>::infinity();
    }
    throw DataError(where + ": expected a number");
}

inline void fail(const std::string &where, const std::string &msg) { throw DataError(where + ": " + msg); }

}  // namespace detail

/// Parses the calibration JSON schema:
///   {"qubits": [{name, T1_us, T2_echo_us, F00, F11, e1, [T2_star_us]}],
///    "cz": [{pattern, pair: [a, b], e2}],
///    "durations_ns": {oneq, twoq, measure, depletion}}
/// Missing optional per-qubit fields are filled with the table average of the
/// rows that do carry them. Every invariant violation names its row/field.
inline CalibrationTable parse_calibration(const nlohmann::json &doc) {
    using nlohmann::json;
    if (!doc.is_object()) {
        detail::fail("calibration", "top level must be an object");
    }
    if (!doc.contains("qubits") || !doc["qubits"].is_array()) {
        detail::fail("calibration", "missing array \"qubits\"");
    }
    if (doc["qubits"].empty()) {
        detail::fail("calibration", "\"qubits\" is empty");
    }
    CalibrationTable cal;
    static const char *fields[] = {"T1_us", "T2_echo_us", "F00", "F11", "e1"};
    std::map<std::string, std::pair<double, int>> sums;
    std::vector<std::map<std::string, double>> rows;
    for (size_t i = 0; i < doc["qubits"].size(); ++i) {
        const auto &row = doc["qubits"][i];
        const std::string where = "qubits[" + std::to_string(i) + "]";
        if (!row.is_object() || !row.contains("name") || !row["name"].is_string()) {
            detail::fail(where, "needs a string \"name\"");
        }
        std::map<std::string, double> vals;
        for (const char *f : fields) {
            if (row.contains(f) && !row[f].is_null()) {
                const double v = detail::number_or_inf(row[f], where + "." + f);
                vals[f] = v;
                if (std::isfinite(v)) {
                    sums[f].first += v;
                    sums[f].second += 1;
                }
            }
        }
        if (row.contains("T2_star_us") && !row["T2_star_us"].is_null()) {
            vals["T2_star_us"] = detail::number_or_inf(row["T2_star_us"], where + ".T2_star_us");
        }
        rows.push_back(std::move(vals));
        QubitCalibration q;
        q.name = row["name"].get<std::string>();
        if (cal.find_qubit(q.name)) {
            detail::fail(where, "duplicate qubit name " + q.name);
        }
        cal.qubits.push_back(q);
    }
    for (size_t i = 0; i < cal.qubits.size(); ++i) {
        const std::string where = "qubits[" + std::to_string(i) + "]";
        auto get = [&](const char *f) {
            auto it = rows[i].find(f);
            if (it != rows[i].end()) {
                return it->second;
            }
            const auto &s = sums[f];
            if (s.second == 0) {
                detail::fail(where + "." + f, "missing and no other row provides an average");
            }
            return s.first / s.second;
        };
        auto &q = cal.qubits[i];
        q.t1_us = get("T1_us");
        q.t2_echo_us = get("T2_echo_us");
        q.f00 = get("F00");
        q.f11 = get("F11");
        q.e1 = get("e1");
        if (auto it = rows[i].find("T2_star_us"); it != rows[i].end()) {
            q.t2_star_us = it->second;
        }
        if (!(q.t1_us > 0)) {
            detail::fail(where + ".T1_us", "must be > 0");
        }
        if (!(q.t2_echo_us > 0)) {
            detail::fail(where + ".T2_echo_us", "must be > 0");
        }
        if (!(q.f00 > 0 && q.f00 <= 1)) {
            detail::fail(where + ".F00", "must be in (0, 1]");
        }
        if (!(q.f11 > 0 && q.f11 <= 1)) {
            detail::fail(where + ".F11", "must be in (0, 1]");
        }
        if (!(q.e1 >= 0 && q.e1 < 1)) {
            detail::fail(where + ".e1", "must be in [0, 1)");
        }
    }
    if (doc.contains("cz")) {
        if (!doc["cz"].is_array()) {
            detail::fail("cz", "must be an array");
        }
        for (size_t i = 0; i < doc["cz"].size(); ++i) {
            const auto &row = doc["cz"][i];
            const std::string where = "cz[" + std::to_string(i) + "]";
            if (!row.is_object() || !row.contains("pattern") || !row["pattern"].is_string() ||
                row["pattern"].get<std::string>().size() != 1) {
                detail::fail(where + ".pattern", "must be one of A, B, C, D");
            }
            CzCalibration c;
            c.pattern = row["pattern"].get<std::string>()[0];
            if (c.pattern < 'A' || c.pattern > 'D') {
                detail::fail(where + ".pattern", "must be one of A, B, C, D");
            }
            if (!row.contains("pair") || !row["pair"].is_array() || row["pair"].size() != 2 ||
                !row["pair"][0].is_string() || !row["pair"][1].is_string()) {
                detail::fail(where + ".pair", "must be two qubit names");
            }
            c.a = row["pair"][0].get<std::string>();
            c.b = row["pair"][1].get<std::string>();
            if (!row.contains("e2")) {
                detail::fail(where + ".e2", "missing");
            }
            c.e2 = detail::number_or_inf(row["e2"], where + ".e2");
            if (!(c.e2 >= 0 && c.e2 < 1)) {
                detail::fail(where + ".e2", "must be in [0, 1)");
            }
            if (cal.find_pair(c.a, c.b)) {
                detail::fail(where + ".pair", "pair " + c.a + "-" + c.b + " listed in more than one entry");
            }
            cal.cz.push_back(c);
        }
    }
    if (doc.contains("durations_ns")) {
        const auto &d = doc["durations_ns"];
        auto get = [&](const char *f, double def) {
            if (!d.contains(f)) {
                return def;
            }
            const double v = detail::number_or_inf(d[f], std::string("durations_ns.") + f);
            if (!(v >= 0) || !std::isfinite(v)) {
                detail::fail(std::string("durations_ns.") + f, "must be a finite duration >= 0");
            }
            return v;
        };
        cal.durations.oneq_ns = get("oneq", cal.durations.oneq_ns);
        cal.durations.twoq_ns = get("twoq", cal.durations.twoq_ns);
        cal.durations.measure_ns = get("measure", cal.durations.measure_ns);
        cal.durations.depletion_ns = get("depletion", cal.durations.depletion_ns);
    }
    return cal;
}

inline CalibrationTable parse_calibration(const std::string &text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw DataError(std::string("calibration is not valid JSON: ") + e.what());
    }
    return parse_calibration(doc);
}

inline CalibrationTable load_calibration(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open calibration file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_calibration(buf.str());
}

inline nlohmann::json to_json(const CalibrationTable &cal) {
    nlohmann::json doc;
    doc["qubits"] = nlohmann::json::array();
    for (const auto &q : cal.qubits) {
        nlohmann::json row = {{"name", q.name},  {"T1_us", q.t1_us}, {"T2_echo_us", q.t2_echo_us},
                              {"F00", q.f00},    {"F11", q.f11},     {"e1", q.e1}};
        if (!std::isnan(q.t2_star_us)) {
            row["T2_star_us"] = q.t2_star_us;
        }
        doc["qubits"].push_back(row);
    }
    doc["cz"] = nlohmann::json::array();
    for (const auto &c : cal.cz) {
        doc["cz"].push_back({{"pattern", std::string(1, c.pattern)}, {"pair", {c.a, c.b}}, {"e2", c.e2}});
    }
    doc["durations_ns"] = {{"oneq", cal.durations.oneq_ns},
                           {"twoq", cal.durations.twoq_ns},
                           {"measure", cal.durations.measure_ns},
                           {"depletion", cal.durations.depletion_ns}};
    return doc;
}

/// Device parameters of the 17-qubit distance-3 chip: single-qubit table
/// (T1, echo T2, Ramsey T2*, readout fidelities, 1Q XEB error) and the CZ
/// XEB errors of the four parallel patterns. Percentages are stored as
/// fractions. Kept byte-for-byte in sync with data/calibration_default.json.
inline constexpr const char *kDefaultCalibrationJson = R"json({
  "qubits": [
    {"name": "D1", "T1_us": 35.9, "T2_echo_us": 4.9, "T2_star_us": 2.1, "F00": 0.976, "F11": 0.923, "e1": 0.00087},
    {"name": "D2", "T1_us": 35.8, "T2_echo_us": 4.5, "T2_star_us": 1.8, "F00": 0.961, "F11": 0.901, "e1": 0.00117},
    {"name": "D3", "T1_us": 26.6, "T2_echo_us": 3.8, "T2_star_us": 2.6, "F00": 0.975, "F11": 0.941, "e1": 0.00072},
    {"name": "D4", "T1_us": 22.0, "T2_echo_us": 6.3, "T2_star_us": 3.2, "F00": 0.977, "F11": 0.927, "e1": 0.00102},
    {"name": "D5", "T1_us": 30.2, "T2_echo_us": 8.4, "T2_star_us": 6.2, "F00": 0.978, "F11": 0.930, "e1": 0.00077},
    {"name": "D6", "T1_us": 31.4, "T2_echo_us": 3.6, "T2_star_us": 1.6, "F00": 0.980, "F11": 0.929, "e1": 0.00063},
    {"name": "D7", "T1_us": 24.5, "T2_echo_us": 4.1, "T2_star_us": 1.3, "F00": 0.978, "F11": 0.939, "e1": 0.00074},
    {"name": "D8", "T1_us": 27.8, "T2_echo_us": 4.9, "T2_star_us": 2.2, "F00": 0.983, "F11": 0.939, "e1": 0.00084},
    {"name": "D9", "T1_us": 21.5, "T2_echo_us": 7.0, "T2_star_us": 5.2, "F00": 0.988, "F11": 0.928, "e1": 0.00118},
    {"name": "X1", "T1_us": 30.3, "T2_echo_us": 7.1, "T2_star_us": 3.4, "F00": 0.986, "F11": 0.940, "e1": 0.00060},
    {"name": "Z1", "T1_us": 18.5, "T2_echo_us": 5.9, "T2_star_us": 3.3, "F00": 0.985, "F11": 0.950, "e1": 0.00121},
    {"name": "X2", "T1_us": 26.9, "T2_echo_us": 8.6, "T2_star_us": 5.7, "F00": 0.961, "F11": 0.917, "e1": 0.00116},
    {"name": "Z2", "T1_us": 26.2, "T2_echo_us": 9.8, "T2_star_us": 5.4, "F00": 0.985, "F11": 0.934, "e1": 0.00152},
    {"name": "Z3", "T1_us": 20.9, "T2_echo_us": 9.9, "T2_star_us": 6.3, "F00": 0.966, "F11": 0.914, "e1": 0.00124},
    {"name": "X3", "T1_us": 22.3, "T2_echo_us": 5.7, "T2_star_us": 4.7, "F00": 0.986, "F11": 0.907, "e1": 0.00125},
    {"name": "Z4", "T1_us": 22.1, "T2_echo_us": 4.7, "T2_star_us": 4.3, "F00": 0.972, "F11": 0.913, "e1": 0.00076},
    {"name": "X4", "T1_us": 21.1, "T2_echo_us": 3.2, "T2_star_us": 1.3, "F00": 0.978, "F11": 0.939, "e1": 0.00102}
  ],
  "cz": [
    {"pattern": "A", "pair": ["D1", "Z1"], "e2": 0.0070},
    {"pattern": "A", "pair": ["D2", "X2"], "e2": 0.0169},
    {"pattern": "A", "pair": ["D3", "Z2"], "e2": 0.0077},
    {"pattern": "A", "pair": ["D5", "Z3"], "e2": 0.0099},
    {"pattern": "A", "pair": ["D6", "X3"], "e2": 0.0130},
    {"pattern": "A", "pair": ["D8", "X4"], "e2": 0.0070},
    {"pattern": "B", "pair": ["D1", "X2"], "e2": 0.0240},
    {"pattern": "B", "pair": ["Z1", "D4"], "e2": 0.0075},
    {"pattern": "B", "pair": ["Z2", "D6"], "e2": 0.0087},
    {"pattern": "B", "pair": ["D5", "X3"], "e2": 0.0114},
    {"pattern": "B", "pair": ["Z3", "D8"], "e2": 0.0062},
    {"pattern": "B", "pair": ["D7", "X4"], "e2": 0.0055},
    {"pattern": "C", "pair": ["X1", "D3"], "e2": 0.0158},
    {"pattern": "C", "pair": ["D2", "Z2"], "e2": 0.0085},
    {"pattern": "C", "pair": ["X2", "D5"], "e2": 0.0071},
    {"pattern": "C", "pair": ["D4", "Z3"], "e2": 0.0130},
    {"pattern": "C", "pair": ["D6", "Z4"], "e2": 0.0102},
    {"pattern": "C", "pair": ["X3", "D9"], "e2": 0.0137},
    {"pattern": "D", "pair": ["X1", "D2"], "e2": 0.0120},
    {"pattern": "D", "pair": ["X2", "D4"], "e2": 0.0146},
    {"pattern": "D", "pair": ["Z2", "D5"], "e2": 0.0080},
    {"pattern": "D", "pair": ["Z3", "D7"], "e2": 0.0068},
    {"pattern": "D", "pair": ["X3", "D8"], "e2": 0.0093},
    {"pattern": "D", "pair": ["Z4", "D9"], "e2": 0.0047}
  ],
  "durations_ns": {"oneq": 25, "twoq": 32, "measure": 1500, "depletion": 2400}
}
)json";

inline CalibrationTable default_calibration() { return parse_calibration(std::string(kDefaultCalibrationJson)); }

}  // namespace surfacelab
