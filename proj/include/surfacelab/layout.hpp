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
#include <cstdint>
#include <cstdlib>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "surfacelab/errors.hpp"
#include "surfacelab/pauli.hpp"

namespace surfacelab {

enum class StabType : uint8_t { Z, X };

inline char stab_letter(StabType t) { return t == StabType::Z ? 'Z' : 'X'; }

/// Coordinates are doubled: data qubit in column c, row r sits at
/// (2c + 1, 2r + 1); plaquette (i, j) sits at (2i, 2j). y grows downward.
struct DataQubit {
    std::string name;
    int x = 0;
    int y = 0;
};

struct Ancilla {
    std::string name;
    StabType type = StabType::Z;
    int x = 0;
    int y = 0;
    std::vector<uint32_t> support;  // data indices, sorted
};

/// One ancilla-data coupler fired in CZ layer `pattern`.
struct Coupling {
    uint32_t ancilla = 0;  // index into CodeLayout::ancillas
    uint32_t data = 0;
    char pattern = 'A';
};

/// Rotated surface code of odd distance d.
///
/// Circuit qubit indices: data 0..d^2-1, then the ancillas in `ancillas`
/// order (all Z-type first, then X-type, each row-major by (y, x)).
struct CodeLayout {
    int d = 3;
    std::vector<DataQubit> data;
    std::vector<Ancilla> ancillas;
    std::vector<Coupling> couplings;
    std::vector<uint32_t> logical_z;  // Z on these data qubits
    std::vector<uint32_t> logical_x;  // X on these data qubits

    size_t n_data() const noexcept { return data.size(); }
    size_t n_ancillas() const noexcept { return ancillas.size(); }
    size_t n_qubits() const noexcept { return data.size() + ancillas.size(); }
    uint32_t ancilla_qubit(size_t a) const noexcept { return static_cast<uint32_t>(data.size() + a); }

    std::vector<std::string> qubit_names() const {
        std::vector<std::string> out;
        out.reserve(n_qubits());
        for (const auto &q : data) {
            out.push_back(q.name);
        }
        for (const auto &a : ancillas) {
            out.push_back(a.name);
        }
        return out;
    }

    std::vector<uint32_t> ancillas_of(StabType t) const {
        std::vector<uint32_t> out;
        for (size_t a = 0; a < ancillas.size(); ++a) {
            if (ancillas[a].type == t) {
                out.push_back(static_cast<uint32_t>(a));
            }
        }
        return out;
    }

    size_t ancilla_index(const std::string &name) const {
        for (size_t a = 0; a < ancillas.size(); ++a) {
            if (ancillas[a].name == name) {
                return a;
            }
        }
        throw ConfigError("no ancilla named " + name);
    }

    /// The plaquette operator of ancilla a as a Pauli string over the data qubits.
    PauliString stabilizer(size_t a) const {
        PauliString p(n_data());
        const bool is_x = ancillas[a].type == StabType::X;
        for (uint32_t q : ancillas[a].support) {
            p.set(q, is_x, !is_x);
        }
        return p;
    }

    PauliString logical(StabType t) const {
        PauliString p(n_data());
        const bool is_x = t == StabType::X;
        for (uint32_t q : is_x ? logical_x : logical_z) {
            p.set(q, is_x, !is_x);
        }
        return p;
    }
};

namespace detail {

/// CZ layer of each neighbour direction. Z-plaquettes visit NE, SE, NW, SW;
/// X-plaquettes visit NE, NW, SE, SW. This ordering keeps the weight-2 hook
/// errors perpendicular to the matching logical operator.
inline char pattern_for(StabType t, int dx, int dy) {
    const bool east = dx > 0, north = dy < 0;
    if (t == StabType::Z) {
        if (east) {
            return north ? 'A' : 'B';
        }
        return north ? 'C' : 'D';
    }
    if (north) {
        return east ? 'A' : 'B';
    }
    return east ? 'C' : 'D';
}

}  // namespace detail

inline CodeLayout build_layout(int d) {
    if (d < 3 || d % 2 == 0) {
        throw ConfigError("code distance must be odd and >= 3 (got " + std::to_string(d) + ")");
    }
    CodeLayout L;
    L.d = d;
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            L.data.push_back({"D" + std::to_string(r * d + c + 1), 2 * c + 1, 2 * r + 1});
        }
    }
    auto data_at = [&](int x, int y) -> int {
        if (x < 1 || y < 1 || x > 2 * d - 1 || y > 2 * d - 1) {
            return -1;
        }
        return ((y - 1) / 2) * d + (x - 1) / 2;
    };
    std::vector<Ancilla> zs, xs;
    for (int j = 0; j <= d; ++j) {
        for (int i = 0; i <= d; ++i) {
            const StabType t = (i + j) % 2 == 0 ? StabType::X : StabType::Z;
            const bool top_bottom = j == 0 || j == d;
            const bool left_right = i == 0 || i == d;
            if (top_bottom && left_right) {
                continue;
            }
            if (top_bottom && t != StabType::X) {
                continue;
            }
            if (left_right && t != StabType::Z) {
                continue;
            }
            Ancilla a;
            a.type = t;
            a.x = 2 * i;
            a.y = 2 * j;
            for (int dy : {-1, 1}) {
                for (int dx : {-1, 1}) {
                    const int q = data_at(a.x + dx, a.y + dy);
                    if (q >= 0) {
                        a.support.push_back(static_cast<uint32_t>(q));
                    }
                }
            }
            std::sort(a.support.begin(), a.support.end());
            (t == StabType::Z ? zs : xs).push_back(a);
        }
    }
    for (size_t k = 0; k < zs.size(); ++k) {
        zs[k].name = "Z" + std::to_string(k + 1);
    }
    for (size_t k = 0; k < xs.size(); ++k) {
        xs[k].name = "X" + std::to_string(k + 1);
    }
    L.ancillas = zs;
    L.ancillas.insert(L.ancillas.end(), xs.begin(), xs.end());
    for (size_t a = 0; a < L.ancillas.size(); ++a) {
        const auto &anc = L.ancillas[a];
        for (uint32_t q : anc.support) {
            const int dx = L.data[q].x - anc.x, dy = L.data[q].y - anc.y;
            L.couplings.push_back({static_cast<uint32_t>(a), q, detail::pattern_for(anc.type, dx, dy)});
        }
    }
    std::sort(L.couplings.begin(), L.couplings.end(), [](const Coupling &u, const Coupling &v) {
        return std::tie(u.pattern, u.ancilla, u.data) < std::tie(v.pattern, v.ancilla, v.data);
    });
    for (int c = 0; c < d; ++c) {
        L.logical_z.push_back(static_cast<uint32_t>(c));
    }
    for (int r = 0; r < d; ++r) {
        L.logical_x.push_back(static_cast<uint32_t>(r * d));
    }
    return L;
}

/// Structural audit. Returns an empty string when every invariant holds,
/// otherwise a description of the first violation.
inline std::string audit_layout(const CodeLayout &L) {
    const size_t dd = static_cast<size_t>(L.d) * static_cast<size_t>(L.d);
    if (L.data.size() != dd || L.ancillas.size() != dd - 1) {
        return "qubit counts do not match d^2 data and d^2-1 ancillas";
    }
    for (size_t a = 0; a < L.ancillas.size(); ++a) {
        const auto &anc = L.ancillas[a];
        if (anc.support.size() != 2 && anc.support.size() != 4) {
            return anc.name + " has weight " + std::to_string(anc.support.size());
        }
        for (uint32_t q : anc.support) {
            if (std::abs(L.data[q].x - anc.x) != 1 || std::abs(L.data[q].y - anc.y) != 1) {
                return anc.name + " support is not adjacent";
            }
        }
        for (size_t b = a + 1; b < L.ancillas.size(); ++b) {
            if (!L.stabilizer(a).commutes(L.stabilizer(b))) {
                return anc.name + " and " + L.ancillas[b].name + " anticommute";
            }
        }
        if (!L.stabilizer(a).commutes(L.logical(StabType::Z)) || !L.stabilizer(a).commutes(L.logical(StabType::X))) {
            return anc.name + " anticommutes with a logical operator";
        }
    }
    if (L.logical(StabType::Z).commutes(L.logical(StabType::X))) {
        return "logical Z and logical X commute";
    }
    std::set<std::pair<char, uint32_t>> used;
    for (const auto &c : L.couplings) {
        if (!used.insert({c.pattern, c.data}).second ||
            !used.insert({c.pattern, L.ancilla_qubit(c.ancilla)}).second) {
            return std::string("qubit reused within pattern ") + c.pattern;
        }
    }
    size_t total = 0;
    for (const auto &a : L.ancillas) {
        total += a.support.size();
    }
    if (total != L.couplings.size()) {
        return "coupling count does not match stabilizer weights";
    }
    return {};
}

inline nlohmann::json layout_to_json(const CodeLayout &L) {
    nlohmann::json j;
    j["distance"] = L.d;
    auto &data = j["data"] = nlohmann::json::array();
    for (size_t q = 0; q < L.data.size(); ++q) {
        data.push_back({{"name", L.data[q].name}, {"index", q}, {"x", L.data[q].x}, {"y", L.data[q].y}});
    }
    auto &anc = j["ancillas"] = nlohmann::json::array();
    for (size_t a = 0; a < L.ancillas.size(); ++a) {
        const auto &A = L.ancillas[a];
        nlohmann::json support = nlohmann::json::array();
        for (uint32_t q : A.support) {
            support.push_back(L.data[q].name);
        }
        anc.push_back({{"name", A.name},
                       {"index", L.ancilla_qubit(a)},
                       {"type", std::string(1, stab_letter(A.type))},
                       {"x", A.x},
                       {"y", A.y},
                       {"support", support}});
    }
    auto &cp = j["couplings"] = nlohmann::json::array();
    for (const auto &c : L.couplings) {
        cp.push_back({{"pattern", std::string(1, c.pattern)},
                      {"pair", {L.data[c.data].name, L.ancillas[c.ancilla].name}}});
    }
    auto names = [&](const std::vector<uint32_t> &v) {
        nlohmann::json out = nlohmann::json::array();
        for (uint32_t q : v) {
            out.push_back(L.data[q].name);
        }
        return out;
    };
    j["logical_z"] = names(L.logical_z);
    j["logical_x"] = names(L.logical_x);
    return j;
}

}  // namespace surfacelab
