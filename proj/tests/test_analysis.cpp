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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "surfacelab/analysis.hpp"
#include "surfacelab/experiment.hpp"

using namespace surfacelab;

namespace {

std::vector<double> model_curve(double eps, double k0, const std::vector<double> &k) {
    std::vector<double> F;
    for (double x : k) {
        F.push_back(0.5 * (1 + std::pow(1 - 2 * eps, x - k0)));
    }
    return F;
}

const std::vector<double> kOneToFive = {1, 2, 3, 4, 5};

}  // namespace

TEST(PostSelect, MasksFollowFlags) {
    DetectionMatrix m;
    m.index.rounds = 3;
    m.index.ancillas = {0, 1};
    m.index.names = {"Z1", "Z2"};
    m.n_shots = 500;
    m.events.assign(m.n_shots * m.index.size(), 0);
    m.raw_logical.assign(m.n_shots, 0);
    RngStream rng(3);
    for (auto &e : m.events) {
        e = rng.bernoulli(0.15);
    }
    const auto none = postselect(m, PostSelectScheme::None);
    const auto data = postselect(m, PostSelectScheme::DataOnly);
    const auto anc = postselect(m, PostSelectScheme::AncillaOnly);
    const auto both = postselect(m, PostSelectScheme::Both);
    for (size_t s = 0; s < m.n_shots; ++s) {
        bool last = false, early = false;
        for (size_t k = 0; k < 2; ++k) {
            for (size_t r = 0; r < 3; ++r) {
                const bool e = m.event(s, m.index.id(k, r));
                (r == 2 ? last : early) |= e;
            }
        }
        EXPECT_EQ(none[s], 1);
        EXPECT_EQ(data[s], last ? 0 : 1);
        EXPECT_EQ(anc[s], early ? 0 : 1);
        EXPECT_EQ(both[s], data[s] & anc[s]);
    }
    EXPECT_LE(retained_rate(both), std::min(retained_rate(data), retained_rate(anc)));
    EXPECT_EQ(retained_rate(none), 1.0);
}

TEST(PostSelect, SchemeNames) {
    for (auto s : kAllSchemes) {
        EXPECT_EQ(parse_scheme(scheme_name(s)), s);
    }
    EXPECT_THROW(parse_scheme("most"), ConfigError);
}

TEST(Fidelity, CoinFlipLimit) {
    RngStream rng(9);
    const size_t N = 200000;
    std::vector<uint8_t> lg(N);
    for (auto &b : lg) {
        b = rng.bit();
    }
    const auto p = fidelity_point(1, lg, {}, 0);
    EXPECT_NEAR(p.fidelity, 0.5, 3 / std::sqrt(static_cast<double>(N)));
    EXPECT_NEAR(p.std_err, std::sqrt(0.25 / N), 1e-5);
}

TEST(Fidelity, WilsonInterval) {
    const auto p = fidelity_point(1, {0, 0, 1, 1}, {}, 0, Interval::Wilson);
    EXPECT_NEAR(p.lo, 0.5 - 0.8 * std::sqrt(0.078125), 1e-12);
    EXPECT_NEAR(p.hi, 0.5 + 0.8 * std::sqrt(0.078125), 1e-12);
    const auto q = fidelity_point(1, {0, 0, 0}, {}, 0, Interval::Wilson);
    EXPECT_NEAR(q.hi, 1.0, 1e-12);
    EXPECT_LT(q.lo, 1.0);
    const auto w = fidelity_point(1, {0, 0, 0}, {}, 0, Interval::Wald);
    EXPECT_EQ(w.lo, 1.0);
}

TEST(Fidelity, NothingRetainedIsNaN) {
    const auto p = fidelity_point(2, {0, 1}, {0, 0}, 0);
    EXPECT_EQ(p.retained, 0U);
    EXPECT_TRUE(std::isnan(p.fidelity));
}

TEST(Fidelity, NoiselessCurvesAreOne) {
    const auto L = build_layout(3);
    const auto cal = default_calibration();
    MemoryRunOptions o;
    o.noiseless = true;
    for (Basis b : {Basis::Z, Basis::X}) {
        std::vector<MemoryPoint> pts;
        for (size_t k = 1; k <= 3; ++k) {
            pts.push_back(run_memory_point(L, cal, b, k, 500, point_seed(1, b, k), o));
        }
        for (const auto &c : memory_curves(pts)) {
            for (const auto &p : c.points) {
                EXPECT_EQ(p.fidelity, 1.0) << c.label;
                EXPECT_EQ(p.retained_rate(), 1.0) << c.label;
            }
        }
    }
}

TEST(Fit, ExactModelRecovered) {
    const auto F = model_curve(0.05, 1, kOneToFive);
    const auto f = fit_logical_error(kOneToFive, F);
    EXPECT_EQ(f.method, "linear");
    EXPECT_NEAR(f.epsilon, 0.05, 1e-9);
    EXPECT_NEAR(f.k0, 1.0, 1e-9);
    EXPECT_LT(f.residual, 1e-12);
    for (size_t i = 0; i < 5; ++i) {
        EXPECT_NEAR(f.model(kOneToFive[i]), F[i], 1e-12);
    }
}

TEST(Fit, ConstantOneGivesZero) {
    const auto f = fit_logical_error(kOneToFive, {1, 1, 1, 1, 1});
    EXPECT_TRUE(f.fittable);
    EXPECT_EQ(f.epsilon, 0.0);
}

TEST(Fit, FallbackWhenAPointSaturates) {
    std::vector<double> k = {1, 2, 3, 4, 5, 6};
    auto F = model_curve(0.3, 0.5, k);
    F[5] = 0.5;
    const auto f = fit_logical_error(k, F);
    EXPECT_EQ(f.method, "golden");
    EXPECT_NEAR(f.epsilon, 0.3, 0.01);
    EXPECT_NEAR(f.k0, 0.5, 0.1);
}

TEST(Fit, FallbackWithTwoPoints) {
    const std::vector<double> k = {1, 2};
    const auto f = fit_logical_error(k, model_curve(0.1, 0, k));
    EXPECT_EQ(f.method, "golden");
    EXPECT_NEAR(f.epsilon, 0.1, 1e-4);
}

TEST(Fit, UnfittableReported) {
    const auto f = fit_logical_error(kOneToFive, {0.5, 0.49, 0.5, 0.3, 0.5});
    EXPECT_FALSE(f.fittable);
    EXPECT_EQ(f.method, "none");
    EXPECT_FALSE(f.note.empty());
    EXPECT_THROW(fit_logical_error({1, 2}, {0.9}), ConfigError);
}

TEST(Fit, BinomialRecoverySmallStudy) {
    std::mt19937_64 gen(2024);
    const size_t N = 480000;
    for (double eps : {0.01, 0.1}) {
        const auto F = model_curve(eps, 0, kOneToFive);
        int good = 0;
        for (int seed = 0; seed < 20; ++seed) {
            std::vector<double> obs;
            for (double f : F) {
                std::binomial_distribution<size_t> b(N, f);
                obs.push_back(static_cast<double>(b(gen)) / N);
            }
            good += std::abs(fit_logical_error(kOneToFive, obs).epsilon - eps) <= 0.05 * eps;
        }
        EXPECT_GE(good, 18) << eps;
    }
}

TEST(Lifetime, AnchorsAndEdges) {
    const auto t = logical_lifetime(0.0322, 4.153);
    EXPECT_NEAR(t.T_L_us, 64.5, 0.5);
    EXPECT_DOUBLE_EQ(logical_lifetime(0.5, 4.153).T_L_us, 4.153);
    EXPECT_DOUBLE_EQ(logical_lifetime(0.0322, 8.306).T_L_us, 2 * t.T_L_us);
    EXPECT_TRUE(logical_lifetime(0, 4.153).infinite);
    EXPECT_THROW(logical_lifetime(0.6, 4.153), ConfigError);
    EXPECT_THROW(logical_lifetime(0.1, 0), ConfigError);
}

TEST(Reference, PhysicalCurve) {
    EXPECT_DOUBLE_EQ(physical_reference_curve(35.9, 4.153, 0), 1.0);
    EXPECT_NEAR(physical_reference_curve(35.9, 4.153, 5), 0.781, 1e-3);
    EXPECT_NEAR(physical_reference_curve(35.9, 4.153, 1e6), 0.5, 1e-12);
    EXPECT_THROW(physical_reference_curve(0, 4.153, 1), ConfigError);
}

TEST(Emission, CsvRoundTrip) {
    FidelityCurve a{"none", Interval::Wald, {}}, b{"decoded", Interval::Wald, {}};
    a.points.push_back(fidelity_point(1, {0, 1, 0, 0}, {}, 0));
    a.points.push_back(fidelity_point(2, {0, 1, 1, 0, 1}, {1, 1, 0, 1, 1}, 0));
    b.points.push_back(fidelity_point(1, {0, 0, 0, 1}, {}, 0));
    const auto csv = curves_to_csv({a, b});
    const auto back = curves_from_csv(csv);
    ASSERT_EQ(back.size(), 2U);
    EXPECT_EQ(back[0].label, "none");
    ASSERT_EQ(back[0].points.size(), 2U);
    EXPECT_EQ(back[0].points[1].retained, 4U);
    EXPECT_EQ(back[0].points[1].correct, 2U);
    EXPECT_NEAR(back[0].points[0].fidelity, 0.75, 1e-9);
    EXPECT_EQ(curves_to_csv(back), csv);
    EXPECT_THROW(curves_from_csv("x,y\n"), DataError);
    EXPECT_THROW(curves_from_csv("curve,k,total\nnone,1,2\n"), DataError);
}

TEST(Emission, FitJsonFields) {
    const auto j = fit_to_json(fit_logical_error(kOneToFive, model_curve(0.05, 1, kOneToFive)));
    EXPECT_TRUE(j.contains("epsilon"));
    EXPECT_TRUE(j.contains("k0"));
    EXPECT_TRUE(j.contains("residual"));
    EXPECT_EQ(j["method"], "linear");
}
