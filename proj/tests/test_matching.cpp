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

#include <algorithm>
#include <functional>
#include <limits>

#include "surfacelab/matching.hpp"
#include "surfacelab/rng.hpp"

using namespace surfacelab;

namespace {

// Minimum perfect-matching cost by subset DP: always pair the lowest
// unmatched vertex.
int64_t dp_min_perfect(int n, const std::vector<std::vector<int64_t>> &c) {
    const int64_t inf = std::numeric_limits<int64_t>::max() / 4;
    std::vector<int64_t> best(size_t{1} << n, inf);
    best[0] = 0;
    for (uint32_t mask = 0; mask < (1U << n); ++mask) {
        if (best[mask] >= inf) {
            continue;
        }
        int i = 0;
        while (i < n && (mask >> i & 1U)) {
            ++i;
        }
        if (i == n) {
            continue;
        }
        for (int j = i + 1; j < n; ++j) {
            if (!(mask >> j & 1U)) {
                const uint32_t next = mask | (1U << i) | (1U << j);
                best[next] = std::min(best[next], best[mask] + c[i][j]);
            }
        }
    }
    return best[(size_t{1} << n) - 1];
}

// Maximum-weight (not necessarily perfect) matching by exhaustive recursion.
int64_t brute_max_weight(int n, const std::vector<WeightedEdge> &edges, uint32_t used = 0, size_t from = 0) {
    int64_t best = 0;
    for (size_t k = from; k < edges.size(); ++k) {
        const auto &e = edges[k];
        if ((used >> e.u & 1U) || (used >> e.v & 1U)) {
            continue;
        }
        best = std::max(best, e.w + brute_max_weight(n, edges, used | (1U << e.u) | (1U << e.v), k + 1));
    }
    return best;
}

}  // namespace

TEST(Blossom, PerfectMatchingMatchesSubsetDp) {
    RngStream rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 * static_cast<int>(1 + rng.below(7));
        const uint64_t range = trial % 3 == 0 ? 4 : 1000;  // small ranges force ties
        std::vector<std::vector<int64_t>> c(n, std::vector<int64_t>(n, 0));
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                c[i][j] = c[j][i] = static_cast<int64_t>(rng.below(range));
            }
        }
        const auto mate = min_weight_perfect_matching(n, [&](int a, int b) { return c[a][b]; });
        int64_t total = 0;
        for (int v = 0; v < n; ++v) {
            ASSERT_GE(mate[v], 0);
            ASSERT_EQ(mate[mate[v]], v);
            if (v < mate[v]) {
                total += c[v][mate[v]];
            }
        }
        ASSERT_EQ(total, dp_min_perfect(n, c)) << "trial " << trial;
    }
}

TEST(Blossom, MaxWeightOnSparseGraphs) {
    RngStream rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(9));
        std::vector<WeightedEdge> edges;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (rng.bernoulli(0.4)) {
                    edges.push_back({i, j, 2 * static_cast<int64_t>(1 + rng.below(50))});
                }
            }
        }
        BlossomMatcher m(n, edges);
        const auto mate = m.solve(false);
        int64_t total = 0;
        for (const auto &e : edges) {
            if (mate[e.u] == e.v) {
                ASSERT_EQ(mate[e.v], e.u);
                total += e.w;
            }
        }
        ASSERT_EQ(total, brute_max_weight(n, edges)) << "trial " << trial;
    }
}

TEST(Blossom, OddVertexCountRejected) {
    EXPECT_THROW(min_weight_perfect_matching(3, [](int, int) { return int64_t{1}; }), ConfigError);
    EXPECT_TRUE(min_weight_perfect_matching(0, [](int, int) { return int64_t{1}; }).empty());
}

TEST(Blossom, InvalidEdgeRejected) {
    EXPECT_THROW(BlossomMatcher(2, {{0, 0, 1}}), ConfigError);
    EXPECT_THROW(BlossomMatcher(2, {{0, 2, 1}}), ConfigError);
}

TEST(Blossom, DeterministicOnTies) {
    const auto a = min_weight_perfect_matching(8, [](int, int) { return int64_t{5}; });
    const auto b = min_weight_perfect_matching(8, [](int, int) { return int64_t{5}; });
    EXPECT_EQ(a, b);
}
