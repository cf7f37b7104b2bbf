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
#include <complex>
#include <set>

#include "surfacelab/engine.hpp"
#include "surfacelab/pauli.hpp"
#include "surfacelab/rng.hpp"
#include "surfacelab/statevector.hpp"
#include "surfacelab/tableau.hpp"

using namespace surfacelab;

namespace {

// <psi| P |psi> computed directly from amplitudes (Hermitian P from a
// letter string, qubit 0 first).
double expectation(const StateVector &sv, const std::string &letters) {
    const auto &a = sv.amplitudes();
    std::complex<double> acc = 0;
    for (size_t k = 0; k < a.size(); ++k) {
        size_t j = k;
        std::complex<double> phase = 1;
        for (size_t q = 0; q < letters.size(); ++q) {
            const bool bit = (k >> q) & 1U;
            switch (letters[q]) {
                case 'X':
                    j ^= size_t{1} << q;
                    break;
                case 'Y':
                    j ^= size_t{1} << q;
                    phase *= bit ? std::complex<double>(0, -1) : std::complex<double>(0, 1);
                    break;
                case 'Z':
                    phase *= bit ? -1.0 : 1.0;
                    break;
                default:
                    break;
            }
        }
        // P|k> = phase |j>
        acc += std::conj(a[j]) * phase * a[k];
    }
    return acc.real();
}

Circuit random_clifford(size_t n, size_t gates, RngStream &rng, bool measure) {
    Circuit c(n);
    uint32_t slot = 0;
    for (size_t g = 0; g < gates; ++g) {
        const auto kind = rng.below(n > 1 ? 5 : 4);
        const auto q = static_cast<uint32_t>(rng.below(n));
        if (kind == 4) {
            auto r = static_cast<uint32_t>(rng.below(n - 1));
            if (r >= q) {
                ++r;
            }
            c.cz(slot++, q, r);
        } else {
            static const Axis axes[] = {Axis::X, Axis::Y, Axis::X, Axis::Y};
            static const Angle angles[] = {Angle::Plus90, Angle::Minus90, Angle::Half, Angle::Plus90};
            c.rot(slot++, q, axes[kind], angles[rng.below(4) % 3]);
        }
        if (measure && rng.below(6) == 0) {
            c.measure_z(slot++, q);
        }
    }
    return c;
}

}  // namespace

TEST(Rng, SameKeySameStream) {
    RngStream a(42, {1, 2}), b(42, {1, 2}), c(42, {2, 1});
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
}

TEST(Rng, DerivedKeysDistinct) {
    std::set<uint64_t> keys;
    for (uint64_t s = 0; s < 1000; ++s) {
        keys.insert(derive_key(7, {s}));
    }
    EXPECT_EQ(keys.size(), 1000U);
}

TEST(Rng, UniformAndBelowRanges) {
    RngStream r(3);
    double mean = 0;
    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        mean += u;
        ++hist[r.below(7)];
    }
    EXPECT_NEAR(mean / 70000, 0.5, 0.01);
    for (int h : hist) {
        EXPECT_NEAR(h, 10000, 500);
    }
}

TEST(Pauli, ParseAndCommute) {
    const auto a = PauliString::from_str("XXI");
    const auto b = PauliString::from_str("ZZI");
    const auto c = PauliString::from_str("ZII");
    EXPECT_TRUE(a.commutes(b));
    EXPECT_FALSE(a.commutes(c));
    EXPECT_EQ(a.weight(), 2U);
    EXPECT_EQ(PauliString::from_str("-XIZ").str(), "-X_Z");
}

TEST(Pauli, ProductSign) {
    // XX * ZZ = (-iY)(-iY) = -YY
    auto p = PauliString::from_str("XX");
    p.mul_right(PauliString::from_str("ZZ"));
    EXPECT_EQ(p.str(), "-YY");
}

TEST(StateVector, RotationsMatchClosedForm) {
    StateVector sv(1);
    sv.apply_matrix(0, rotation_matrix(Axis::Y, Angle::Plus90));
    EXPECT_NEAR(sv.amplitudes()[0].real(), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(sv.amplitudes()[1].real(), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(expectation(sv, "X"), 1.0, 1e-12);
    StateVector s2(1);
    s2.apply_matrix(0, rotation_matrix(Axis::X, Angle::Plus90));
    EXPECT_NEAR(expectation(s2, "Y"), -1.0, 1e-12);
    StateVector s3(1);
    s3.apply_matrix(0, rotation_matrix(Axis::XY, Angle::Plus90));
    // a quarter turn about any equatorial axis leaves <Z> = 0
    EXPECT_NEAR(s3.norm_squared(), 1.0, 1e-12);
    EXPECT_NEAR(expectation(s3, "Z"), 0.0, 1e-12);
}

TEST(StateVector, CapEnforced) { EXPECT_THROW(StateVector(30, 24), ResourceError); }

TEST(Tableau, MatchesStateVectorOnRandomCliffords) {
    RngStream rng(11);
    const std::vector<std::string> obs1 = {"X", "Y", "Z"};
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 1 + rng.below(4);
        const Circuit c = random_clifford(n, 12, rng, false);
        StabilizerTableau t(n);
        StateVector sv(n);
        for (const auto &in : c.instructions()) {
            t.apply(in);
            sv.apply(in);
        }
        ASSERT_TRUE(t.validate());
        // every 1- and 2-qubit Pauli observable
        for (size_t q = 0; q < n; ++q) {
            for (size_t r = q; r < n; ++r) {
                for (const auto &a : obs1) {
                    for (const auto &b : obs1) {
                        std::string letters(n, 'I');
                        letters[q] = a[0];
                        if (r != q) {
                            letters[r] = b[0];
                        } else if (b != "X") {
                            continue;
                        }
                        const double e = expectation(sv, letters);
                        const int peek = t.peek_observable(PauliString::from_str(letters));
                        ASSERT_NEAR(e, static_cast<double>(peek), 1e-9) << letters << " trial " << trial;
                    }
                }
            }
        }
    }
}

TEST(Tableau, MeasurementCollapses) {
    StabilizerTableau t(2);
    t.ry_plus(0);
    t.ry_plus(1);
    t.cz(0, 1);
    t.ry_minus(1);  // Bell-type state: Z0 Z1 correlated
    RngStream rng(5);
    const bool m0 = t.measure_z(0, rng);
    EXPECT_TRUE(t.is_deterministic(1));
    const bool m1 = t.measure_z(1, rng);
    EXPECT_EQ(m0, m1);
}

TEST(Engine, ExactDistributionBell) {
    Circuit c(2);
    c.rot(0, 0, Axis::Y, Angle::Plus90);
    c.rot(0, 1, Axis::Y, Angle::Plus90);
    c.cz(1, 0, 1);
    c.rot(2, 1, Axis::Y, Angle::Minus90);
    c.measure_z(3, 0);
    c.measure_z(3, 1);
    const auto d = exact_distribution(c);
    ASSERT_EQ(d.size(), 4U);
    EXPECT_NEAR(d[0], 0.5, 1e-12);
    EXPECT_NEAR(d[3], 0.5, 1e-12);
    EXPECT_NEAR(d[1] + d[2], 0.0, 1e-12);
}

TEST(Engine, EnginesAgreeWithExactDistribution) {
    RngStream rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t n = 2 + rng.below(3);
        Circuit c = random_clifford(n, 10, rng, true);
        for (uint32_t q = 0; q < n; ++q) {
            c.measure_z(c.instructions().empty() ? 0 : c.instructions().back().slot + 1, q);
        }
        if (c.n_records() > 12) {
            continue;
        }
        const auto exact = exact_distribution(c);
        for (Engine e : {Engine::Tableau, Engine::StateVector, Engine::Frame}) {
            RunOptions o;
            o.engine = e;
            const auto b = run_circuit(c, nullptr, 20000, 17 + trial, o);
            EXPECT_LT(total_variation(exact, empirical_distribution(b)), 0.04)
                << engine_name(e) << " trial " << trial;
        }
    }
}

TEST(Engine, WorkerCountDoesNotChangeOutput) {
    RngStream rng(5);
    Circuit c = random_clifford(4, 30, rng, true);
    for (Engine e : {Engine::Tableau, Engine::Frame}) {
        RunOptions o1, o4;
        o1.engine = o4.engine = e;
        o4.workers = 4;
        const auto a = run_circuit(c, nullptr, 1000, 8, o1);
        const auto b = run_circuit(c, nullptr, 1000, 8, o4);
        EXPECT_EQ(serialize_shots(a), serialize_shots(b)) << engine_name(e);
    }
}

TEST(ShotFile, RoundTripAndCorruption) {
    ShotBatch b(3, 11, 5, 1234);
    b.set_bit(0, 0, true);
    b.set_bit(4, 10, true);
    b.set_bit(2, 7, true);
    const auto bytes = serialize_shots(b);
    EXPECT_EQ(bytes.size(), kShotHeaderBytes + 5 * 2);
    const auto back = deserialize_shots(bytes);
    EXPECT_TRUE(back == b);
    EXPECT_EQ(back.seed(), 1234U);
    EXPECT_THROW(deserialize_shots(bytes.substr(0, bytes.size() - 1)), DataError);
    EXPECT_THROW(deserialize_shots("QSHOT0" + bytes.substr(6)), DataError);
    EXPECT_THROW(deserialize_shots(bytes + "x"), DataError);
}

TEST(Circuit, ValidateRejectsBadSlots) {
    Circuit c(2);
    c.rot(3, 0, Axis::X, Angle::Plus90);
    EXPECT_THROW(c.rot(1, 0, Axis::X, Angle::Plus90), ConfigError);
}
