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
#include <limits>
#include <set>

#include "surfacelab/engine.hpp"
#include "surfacelab/xeb.hpp"

using namespace surfacelab;

namespace {

CalibrationTable perfect_table() {
    CalibrationTable cal = default_calibration();
    for (auto &q : cal.qubits) {
        q.t1_us = q.t2_echo_us = std::numeric_limits<double>::infinity();
        q.f00 = q.f11 = 1;
        q.e1 = 0;
    }
    for (auto &c : cal.cz) {
        c.e2 = 0;
    }
    return cal;
}

}  // namespace

TEST(RandomCircuit, StructuralInvariants) {
    const auto L = build_layout(3);
    const auto rc = generate_random_circuit(L, 5);
    ASSERT_EQ(rc.gates.size(), 21U);
    ASSERT_EQ(rc.patterns.size(), 20U);
    for (size_t layer = 1; layer < 21; ++layer) {
        for (size_t q = 0; q < 17; ++q) {
            EXPECT_NE(rc.gates[layer][q], rc.gates[layer - 1][q]);
        }
    }
    for (size_t i = 0; i < 20; ++i) {
        EXPECT_EQ(rc.patterns[i], "ABCD"[i % 4]);
    }
    const auto &c = rc.circuit;
    EXPECT_EQ(c.count(OpCode::Rot), 21U * 17);
    EXPECT_EQ(c.count(OpCode::CZ), 20U * 6);
    EXPECT_EQ(c.count(OpCode::MeasureZ), 17U);
    EXPECT_EQ(c.last_slot(), 41U);  // 41 gate layers, then readout
    EXPECT_NO_THROW(c.validate());
    // every CZ layer uses only its own pattern's pairs
    for (const auto &in : c.instructions()) {
        if (in.op == OpCode::CZ) {
            EXPECT_EQ(in.tag, rc.patterns[(in.slot - 1) / 2]);
        }
    }
}

TEST(RandomCircuit, DeterministicAndSeedDependent) {
    const auto L = build_layout(3);
    EXPECT_EQ(generate_random_circuit(L, 3).circuit.to_text(), generate_random_circuit(L, 3).circuit.to_text());
    std::set<std::string> texts;
    for (uint64_t s = 1; s <= 9; ++s) {
        texts.insert(generate_random_circuit(L, s).circuit.to_text());
    }
    EXPECT_EQ(texts.size(), 9U);
}

TEST(Ideal, MatchesBranchingOracleOnSmallCircuit) {
    Circuit c(3);
    c.rot(0, 0, Axis::XY, Angle::Plus90);
    c.rot(0, 1, Axis::Y, Angle::Plus90);
    c.rot(0, 2, Axis::X, Angle::Plus90);
    c.cz(1, 0, 1);
    c.rot(2, 1, Axis::XY, Angle::Plus90);
    c.cz(3, 1, 2);
    c.rot(4, 2, Axis::XY, Angle::Plus90);
    for (uint32_t q = 0; q < 3; ++q) {
        c.measure_z(5, q);
    }
    const auto a = ideal_probabilities(c);
    const auto b = exact_distribution(c);
    ASSERT_EQ(a.size(), b.size());
    for (size_t x = 0; x < a.size(); ++x) {
        EXPECT_NEAR(a[x], b[x], 1e-12);
    }
}

TEST(Xeb, UniformSamplesGiveZero) {
    const auto L = build_layout(3);
    const auto rc = generate_random_circuit(L, 1);
    const auto ideal = ideal_probabilities(rc.circuit);
    RngStream rng(77);
    const size_t N = 100000;
    std::vector<uint64_t> samples(N);
    for (auto &x : samples) {
        x = rng.below(ideal.size());
    }
    const auto r = xeb_fidelity(samples, ideal, 17);
    EXPECT_NEAR(r.fidelity, 0.0, 3 * r.std_err);
    EXPECT_DOUBLE_EQ(r.std_err, 1 / std::sqrt(100000.0));
}

TEST(Xeb, IdealSamplesGiveOne) {
    const auto L = build_layout(3);
    const auto rc = generate_random_circuit(L, 1);
    const auto ideal = ideal_probabilities(rc.circuit);
    const auto r = xeb_fidelity(sample_ideal(ideal, 100000, 4), ideal, 17);
    // Porter-Thomas spread of 2^n P(x) under ideal sampling is sqrt(2)
    EXPECT_NEAR(r.fidelity, 1.0, 3 * std::sqrt(2.0) * r.std_err);
}

TEST(Xeb, InputValidation) {
    const std::vector<double> ideal = {0.5, 0.5};
    EXPECT_THROW(xeb_fidelity({}, ideal, 1), DataError);
    EXPECT_THROW(xeb_fidelity({0}, {0.5, 0.6}, 1), DataError);
    EXPECT_THROW(xeb_fidelity({2}, ideal, 1), DataError);
    EXPECT_THROW(xeb_fidelity({0}, ideal, 2), ConfigError);
}

TEST(Prediction, ZeroErrorTableGivesOne) {
    const auto L = build_layout(3);
    const auto rc = generate_random_circuit(L, 2);
    EXPECT_DOUBLE_EQ(predicted_fidelity(perfect_table(), rc.circuit), 1.0);
}

TEST(Prediction, SingleGate) {
    CalibrationTable cal = perfect_table();
    cal.qubits[0].e1 = 0.001;
    Circuit c(std::vector<std::string>{cal.qubits[0].name});
    c.rot(0, 0, Axis::X, Angle::Plus90);
    c.measure_z(1, 0);
    EXPECT_NEAR(predicted_fidelity(cal, c), 0.9985, 1e-12);
}

TEST(Prediction, DefaultTableInRange) {
    const auto L = build_layout(3);
    const auto cal = default_calibration();
    for (uint64_t s = 1; s <= 3; ++s) {
        const double p = predicted_fidelity(cal, generate_random_circuit(L, s, cal.durations).circuit);
        EXPECT_GE(p, 0.02);
        EXPECT_LE(p, 0.04);
    }
}

TEST(NoisyXeb, NoiselessTableMatchesIdealSampling) {
    const auto L = build_layout(3);
    const auto cal = perfect_table();
    const auto rc = generate_random_circuit(L, 3, cal.durations);
    XebOptions o;
    o.samples = 50000;
    o.trajectories = 4;
    const auto r = noisy_xeb(rc, cal, 1, o);
    EXPECT_EQ(r.p_clean, 1.0);
    EXPECT_EQ(r.trajectories, 0U);
    EXPECT_NEAR(r.xeb.fidelity, 1.0, 3 * std::sqrt(2.0) * r.xeb.std_err);
}

TEST(NoisyXeb, DefaultNoiseSmallRunAndWorkerInvariance) {
    const auto L = build_layout(3);
    const auto cal = default_calibration();
    const auto rc = generate_random_circuit(L, 4, cal.durations);
    XebOptions o;
    o.samples = 20000;
    o.trajectories = 6;
    const auto a = noisy_xeb(rc, cal, 9, o);
    o.workers = 2;
    const auto b = noisy_xeb(rc, cal, 9, o);
    EXPECT_EQ(a.xeb.fidelity, b.xeb.fidelity);
    EXPECT_EQ(a.xeb.samples, 20000U);
    EXPECT_GT(a.p_clean, 0.0);
    EXPECT_LT(a.p_clean, 0.5);
    EXPECT_LT(a.xeb.fidelity, 0.3);
    EXPECT_GE(a.predicted, 0.02);
    EXPECT_LE(a.predicted, 0.04);
}

TEST(NoisyXeb, CsvHeader) {
    NoisyXebResult r;
    const auto csv = xeb_to_csv({{7, r}});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "seed,fidelity,stderr,samples,trajectories,trajectory_stderr,p_clean,predicted");
}
