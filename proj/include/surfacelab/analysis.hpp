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
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "surfacelab/detection.hpp"
#include "surfacelab/errors.hpp"

namespace surfacelab {

// ---- Post-selection --------------------------------------------------------------

enum class PostSelectScheme : uint8_t { None, DataOnly, AncillaOnly, Both };

inline constexpr PostSelectScheme kAllSchemes[] = {PostSelectScheme::None, PostSelectScheme::DataOnly,
                                                   PostSelectScheme::AncillaOnly, PostSelectScheme::Both};

inline const char *scheme_name(PostSelectScheme s) {
    switch (s) {
        case PostSelectScheme::None:
            return "none";
        case PostSelectScheme::DataOnly:
            return "data";
        case PostSelectScheme::AncillaOnly:
            return "ancilla";
        case PostSelectScheme::Both:
            return "both";
    }
    return "?";
}

inline PostSelectScheme parse_scheme(const std::string &s) {
    for (auto k : kAllSchemes) {
        if (s == scheme_name(k)) {
            return k;
        }
    }
    throw ConfigError("unknown post-selection scheme '" + s + "' (expected none, data, ancilla or both)");
}

/// Retention mask: 1 keeps the shot.
inline std::vector<uint8_t> postselect(const DetectionMatrix &m, PostSelectScheme scheme) {
    std::vector<uint8_t> keep(m.n_shots, 1);
    if (scheme == PostSelectScheme::None) {
        return keep;
    }
    const bool data = scheme == PostSelectScheme::DataOnly || scheme == PostSelectScheme::Both;
    const bool anc = scheme == PostSelectScheme::AncillaOnly || scheme == PostSelectScheme::Both;
    for (size_t s = 0; s < m.n_shots; ++s) {
        if ((data && m.data_flagged(s)) || (anc && m.ancilla_flagged(s))) {
            keep[s] = 0;
        }
    }
    return keep;
}

inline double retained_rate(const std::vector<uint8_t> &keep) {
    if (keep.empty()) {
        return 0.0;
    }
    size_t n = 0;
    for (auto k : keep) {
        n += k;
    }
    return static_cast<double>(n) / static_cast<double>(keep.size());
}

// ---- Fidelity curves ---------------------------------------------------------------

enum class Interval : uint8_t { Wald, Wilson };

struct FidelityPoint {
    size_t k = 0;
    size_t total = 0;
    size_t retained = 0;
    size_t correct = 0;
    double fidelity = 0;
    double std_err = 0;  // Wald standard error
    double lo = 0;      // 1-sigma interval under the chosen rule
    double hi = 0;

    double retained_rate() const { return total ? static_cast<double>(retained) / static_cast<double>(total) : 0.0; }
};

struct FidelityCurve {
    std::string label;
    Interval interval = Interval::Wald;
    std::vector<FidelityPoint> points;
};

/// Fraction of retained shots whose logical value equals `target`.
inline FidelityPoint fidelity_point(size_t k, const std::vector<uint8_t> &logical, const std::vector<uint8_t> &keep,
                                    uint8_t target, Interval iv = Interval::Wald) {
    if (!keep.empty() && keep.size() != logical.size()) {
        throw ConfigError("retention mask and logical values differ in length");
    }
    FidelityPoint p;
    p.k = k;
    p.total = logical.size();
    for (size_t s = 0; s < logical.size(); ++s) {
        if (keep.empty() || keep[s]) {
            ++p.retained;
            p.correct += logical[s] == target ? 1 : 0;
        }
    }
    if (p.retained == 0) {
        p.fidelity = std::numeric_limits<double>::quiet_NaN();
        p.std_err = p.lo = p.hi = std::numeric_limits<double>::quiet_NaN();
        return p;
    }
    const double n = static_cast<double>(p.retained);
    const double f = static_cast<double>(p.correct) / n;
    p.fidelity = f;
    p.std_err = std::sqrt(f * (1 - f) / n);
    if (iv == Interval::Wald) {
        p.lo = std::max(0.0, f - p.std_err);
        p.hi = std::min(1.0, f + p.std_err);
    } else {
        const double z = 1.0, z2 = z * z;
        const double centre = (f + z2 / (2 * n)) / (1 + z2 / n);
        const double half = z / (1 + z2 / n) * std::sqrt(f * (1 - f) / n + z2 / (4 * n * n));
        p.lo = centre - half;
        p.hi = centre + half;
    }
    return p;
}

// ---- Exponential-decay fit ------------------------------------------------------------

struct FitResult {
    bool fittable = false;
    std::string method;  // "linear", "golden" or "none"
    double epsilon = 0;  // logical error per cycle
    double k0 = 0;
    double residual = 0;  // RMS of fidelity residuals
    std::string note;

    double model(double k) const { return 0.5 * (1 + std::pow(1 - 2 * epsilon, k - k0)); }
};

namespace detail {

inline double fit_rms(const FitResult &f, const std::vector<double> &k, const std::vector<double> &F) {
    double s = 0;
    for (size_t i = 0; i < k.size(); ++i) {
        const double d = f.model(k[i]) - F[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(k.size()));
}

/// Best amplitude C >= 0 for 2F - 1 = C r^k at fixed r, and its squared error.
inline std::pair<double, double> profile_amplitude(double r, const std::vector<double> &k, const std::vector<double> &F) {
    double num = 0, den = 0;
    for (size_t i = 0; i < k.size(); ++i) {
        const double rk = std::pow(r, k[i]);
        num += (2 * F[i] - 1) * rk;
        den += rk * rk;
    }
    const double C = den > 0 ? std::max(0.0, num / den) : 0.0;
    double sse = 0;
    for (size_t i = 0; i < k.size(); ++i) {
        const double d = C * std::pow(r, k[i]) - (2 * F[i] - 1);
        sse += d * d;
    }
    return {C, sse};
}

}  // namespace detail

/// Fits F(k) = (1 + (1 - 2 eps)^(k - k0)) / 2. Uses ordinary least squares of
/// ln(2F - 1) on k when every point lies above 1/2 (and at least three do);
/// otherwise a golden-section search over eps with k0 profiled out.
inline FitResult fit_logical_error(const std::vector<double> &k, const std::vector<double> &F) {
    if (k.size() != F.size() || k.empty()) {
        throw ConfigError("fit needs matching, nonempty k and fidelity arrays");
    }
    FitResult out;
    size_t above = 0;
    bool any_nonpositive = false;
    for (double f : F) {
        if (!std::isfinite(f)) {
            throw DataError("fidelity values must be finite");
        }
        above += f > 0.5 ? 1 : 0;
        any_nonpositive = any_nonpositive || !(f > 0.5);
    }
    if (above == 0) {
        out.method = "none";
        out.note = "all fidelities at or below 1/2";
        return out;
    }
    out.fittable = true;
    if (!any_nonpositive && above >= 3) {
        const size_t n = k.size();
        double sk = 0, sy = 0, skk = 0, sky = 0;
        for (size_t i = 0; i < n; ++i) {
            const double y = std::log(2 * F[i] - 1);
            sk += k[i];
            sy += y;
            skk += k[i] * k[i];
            sky += k[i] * y;
        }
        const double dn = static_cast<double>(n);
        const double den = dn * skk - sk * sk;
        if (den == 0) {
            throw ConfigError("fit needs at least two distinct cycle counts");
        }
        const double a = (dn * sky - sk * sy) / den;
        const double b = (sy - a * sk) / dn;
        out.method = "linear";
        if (a >= 0) {
            out.epsilon = 0;
            out.k0 = 0;
            if (a > 0) {
                out.note = "fidelity increases with k; clamped to eps = 0";
            }
        } else {
            out.epsilon = (1 - std::exp(a)) / 2;
            out.k0 = -b / a;
        }
        out.residual = detail::fit_rms(out, k, F);
        return out;
    }
    // Golden-section search on eps in [0, 1/2).
    auto sse = [&](double eps) { return detail::profile_amplitude(1 - 2 * eps, k, F).second; };
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double lo = 0, hi = 0.5 - 1e-12;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = sse(x1), f2 = sse(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse(x2);
        }
    }
    out.method = "golden";
    out.epsilon = (lo + hi) / 2;
    const double r = 1 - 2 * out.epsilon;
    const double C = detail::profile_amplitude(r, k, F).first;
    out.k0 = (C > 0 && r > 0 && r < 1) ? -std::log(C) / std::log(r) : 0.0;
    out.residual = detail::fit_rms(out, k, F);
    return out;
}

inline FitResult fit_logical_error(const FidelityCurve &c) {
    std::vector<double> k, F;
    for (const auto &p : c.points) {
        if (p.retained > 0) {
            k.push_back(static_cast<double>(p.k));
            F.push_back(p.fidelity);
        }
    }
    return fit_logical_error(k, F);
}

// ---- Lifetime and reference curve ---------------------------------------------------------

struct LifetimeEstimate {
    bool infinite = false;
    double T_L_us = 0;
    double tau_cycle_us = 0;
};

inline LifetimeEstimate logical_lifetime(double epsilon, double tau_cycle_us) {
    if (!(tau_cycle_us > 0)) {
        throw ConfigError("cycle time must be positive");
    }
    if (epsilon < 0 || epsilon > 0.5) {
        throw ConfigError("logical error per cycle must lie in [0, 0.5]");
    }
    LifetimeEstimate out;
    out.tau_cycle_us = tau_cycle_us;
    if (epsilon == 0) {
        out.infinite = true;
        out.T_L_us = std::numeric_limits<double>::infinity();
    } else {
        out.T_L_us = tau_cycle_us / (2 * epsilon);
    }
    return out;
}

/// Single-qubit relaxation reference: (1 + exp(-k tau / T1)) / 2.
inline double physical_reference_curve(double T1_best_us, double tau_cycle_us, double k) {
    if (!(T1_best_us > 0)) {
        throw ConfigError("T1 must be positive");
    }
    return 0.5 * (1 + std::exp(-k * tau_cycle_us / T1_best_us));
}

// ---- Emission -------------------------------------------------------------------------

inline std::string curves_to_csv(const std::vector<FidelityCurve> &curves) {
    std::ostringstream out;
    out.precision(10);
    out << "curve,k,total,retained,retained_rate,correct,fidelity,stderr,lo,hi\n";
    for (const auto &c : curves) {
        for (const auto &p : c.points) {
            out << c.label << ',' << p.k << ',' << p.total << ',' << p.retained << ',' << p.retained_rate() << ','
                << p.correct << ',' << p.fidelity << ',' << p.std_err << ',' << p.lo << ',' << p.hi << '\n';
        }
    }
    return out.str();
}

inline nlohmann::json fit_to_json(const FitResult &f) {
    nlohmann::json j;
    j["fittable"] = f.fittable;
    j["method"] = f.method;
    j["epsilon"] = f.epsilon;
    j["k0"] = f.k0;
    j["residual"] = f.residual;
    if (!f.note.empty()) {
        j["note"] = f.note;
    }
    return j;
}

inline nlohmann::json curves_to_json(const std::vector<FidelityCurve> &curves) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &c : curves) {
        nlohmann::json jc;
        jc["curve"] = c.label;
        jc["interval"] = c.interval == Interval::Wald ? "wald" : "wilson";
        nlohmann::json pts = nlohmann::json::array();
        for (const auto &p : c.points) {
            pts.push_back({{"k", p.k},
                           {"total", p.total},
                           {"retained", p.retained},
                           {"correct", p.correct},
                           {"fidelity", p.fidelity},
                           {"stderr", p.std_err},
                           {"lo", p.lo},
                           {"hi", p.hi}});
        }
        jc["points"] = pts;
        arr.push_back(jc);
    }
    return arr;
}

/// Reads the CSV written by curves_to_csv back into curves (order of first
/// appearance).
inline std::vector<FidelityCurve> curves_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("curve,k,", 0) != 0) {
        throw DataError("fidelity CSV lacks the expected header");
    }
    std::vector<FidelityCurve> out;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() != 10) {
            throw DataError("fidelity CSV line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                            " fields");
        }
        try {
            FidelityPoint p;
            p.k = std::stoul(f[1]);
            p.total = std::stoul(f[2]);
            p.retained = std::stoul(f[3]);
            p.correct = std::stoul(f[5]);
            p.fidelity = std::stod(f[6]);
            p.std_err = std::stod(f[7]);
            p.lo = std::stod(f[8]);
            p.hi = std::stod(f[9]);
            auto it = std::find_if(out.begin(), out.end(), [&](const FidelityCurve &c) { return c.label == f[0]; });
            if (it == out.end()) {
                out.push_back({f[0], Interval::Wald, {}});
                it = out.end() - 1;
            }
            it->points.push_back(p);
        } catch (const std::logic_error &) {
            throw DataError("fidelity CSV line " + std::to_string(lineno) + " is not numeric");
        }
    }
    return out;
}

}  // namespace surfacelab
