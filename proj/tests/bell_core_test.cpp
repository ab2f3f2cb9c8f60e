// Copyright 2026 The subset-bell Authors
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

#include "sbell/bell_core.hpp"

#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

using namespace sbell;

namespace {

const double kCos2 = std::pow(std::cos(std::numbers::pi / 8.0), 2);

Behavior random_behavior(std::mt19937_64& rng, Shape s) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(s.table_size());
    for (std::uint32_t x = 0; x < s.settings_a; ++x)
        for (std::uint32_t y = 0; y < s.settings_b; ++y) {
            const std::size_t off = s.context_offset({x, y});
            double total = 0.0;
            for (std::size_t k = 0; k < s.outcome_pairs(); ++k) total += (p[off + k] = unit(rng));
            for (std::size_t k = 0; k < s.outcome_pairs(); ++k) p[off + k] /= total;
            // Absorb the rounding residue so the context sums to 1 within 1e-12.
            double sum = 0.0;
            for (std::size_t k = 1; k < s.outcome_pairs(); ++k) sum += p[off + k];
            p[off] = 1.0 - sum;
        }
    return Behavior(s, std::move(p));
}

BellInequality random_inequality(std::mt19937_64& rng, Shape s) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> c(s.table_size());
    for (double& v : c) v = coef(rng);
    return BellInequality(s, std::move(c), 0.0, static_cast<double>(s.settings_a * s.settings_b));
}

}  // namespace

TEST(chsh_inequality, constants) {
    const auto chsh = chsh_inequality();
    EXPECT_EQ(chsh.num_contexts(), 4u);
    EXPECT_EQ(chsh.local_bound(), 3.0);
    EXPECT_EQ(chsh.algebraic_bound(), 4.0);
    EXPECT_EQ(chsh.local_bound(), oracle::chsh_local_bound());
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t a = 0; a < 2; ++a)
                for (std::uint32_t b = 0; b < 2; ++b)
                    EXPECT_EQ(chsh.coefficient(a, b, x, y), ((a ^ b) == (x & y)) ? 1.0 : 0.0);
}

TEST(chsh_inequality, algebraic_bound_is_reachable) {
    // A PR box makes every term 1.
    const Shape s = kBinaryTwoSetting;
    std::vector<double> p(s.table_size(), 0.0);
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t a = 0; a < 2; ++a) p[s.index(a, a ^ (x & y), x, y)] = 0.5;
    EXPECT_DOUBLE_EQ(evaluate_bell(chsh_inequality(), Behavior(s, p)), 4.0);
}

TEST(evaluate_bell, chsh_reference_values) {
    const auto chsh = chsh_inequality();
    EXPECT_NEAR(evaluate_bell(chsh, chsh_quantum_behavior(1.0)), 2.0 + std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(evaluate_bell(chsh, uniform_behavior(kBinaryTwoSetting)), 2.0, 1e-12);
    const std::uint32_t zeros[2] = {0, 0};
    EXPECT_NEAR(evaluate_bell(chsh, deterministic_behavior(kBinaryTwoSetting, zeros, zeros)), 3.0, 1e-12);
    EXPECT_NEAR(evaluate_bell(chsh, chsh_quantum_behavior(0.9)), 3.272, 1e-3);
}

TEST(evaluate_bell, missing_context) {
    const auto chsh = chsh_inequality();
    const Behavior small(Shape{1, 2, 2, 2}, std::vector<double>(8, 0.25));
    EXPECT_THROW(evaluate_bell(chsh, small), MissingContextError);
}

TEST(behavior, rejects_unnormalized_and_negative) {
    std::vector<double> p(16, 0.25);
    p[0] = 0.25 + 1e-9;
    EXPECT_THROW(Behavior(kBinaryTwoSetting, p), InvalidBehaviorError);
    p[0] = 0.25 + 1e-14;
    EXPECT_NO_THROW(Behavior(kBinaryTwoSetting, p));
    p[0] = -0.25;
    p[1] = 0.75;
    EXPECT_THROW(Behavior(kBinaryTwoSetting, p), InvalidBehaviorError);
    EXPECT_THROW(Behavior(kBinaryTwoSetting, std::vector<double>(15, 0.25)), InvalidBehaviorError);
}

TEST(context_term, chsh_terms) {
    const auto chsh = chsh_inequality();
    for (const Context& j : chsh.contexts()) {
        EXPECT_NEAR(context_term(chsh, chsh_quantum_behavior(1.0), j).value, kCos2, 1e-12);
        EXPECT_NEAR(context_term(chsh, uniform_behavior(kBinaryTwoSetting), j).value, 0.5, 1e-12);
        EXPECT_NEAR(context_term(chsh, chsh_quantum_behavior(0.9), j).value, 0.9 * kCos2 + 0.05, 1e-12);
    }
    EXPECT_THROW(context_term(chsh, chsh_quantum_behavior(1.0), Context{2, 0}), UnknownContextError);
}

TEST(context_term, inequality_without_support_drops_contexts) {
    const Shape s = kBinaryTwoSetting;
    std::vector<double> c(s.table_size(), 0.0);
    c[s.index(0, 0, 1, 1)] = 1.0;
    c[s.index(1, 1, 0, 1)] = -2.0;
    const BellInequality ineq(s, c, 0.0, 1.0);
    ASSERT_EQ(ineq.num_contexts(), 2u);
    EXPECT_EQ(ineq.contexts()[0], (Context{0, 1}));
    EXPECT_EQ(ineq.contexts()[1], (Context{1, 1}));
    EXPECT_THROW(context_term(ineq, uniform_behavior(s), Context{0, 0}), UnknownContextError);
}

TEST(bell_inequality, local_bound_above_algebraic_rejected) {
    EXPECT_THROW(BellInequality(kBinaryTwoSetting, std::vector<double>(16, 1.0), 5.0, 4.0), DomainError);
}

// The quantum behavior agrees entry by entry with the explicit two-qubit expectation values.
TEST(chsh_quantum_behavior, matches_qubit_expectation_values) {
    for (double v : {0.0, 0.3, 0.9, 1.0}) {
        const auto beh = chsh_quantum_behavior(v);
        for (std::uint32_t x = 0; x < 2; ++x)
            for (std::uint32_t y = 0; y < 2; ++y)
                for (std::uint32_t a = 0; a < 2; ++a)
                    for (std::uint32_t b = 0; b < 2; ++b)
                        EXPECT_NEAR(beh(a, b, x, y), oracle::chsh_quantum_probability(a, b, x, y, v), 1e-12);
    }
}

TEST(chsh_quantum_behavior, valid_with_uniform_marginals) {
    for (int k = 0; k <= 100; ++k) {
        const double v = k / 100.0;
        const auto beh = chsh_quantum_behavior(v);  // constructor validates normalization
        for (double p : beh.table()) EXPECT_GE(p, 0.0);
        for (std::uint32_t x = 0; x < 2; ++x)
            for (std::uint32_t y = 0; y < 2; ++y) {
                EXPECT_NEAR(beh.marginal_a(0, {x, y}), 0.5, 1e-12);
                EXPECT_NEAR(beh.marginal_b(1, {x, y}), 0.5, 1e-12);
            }
    }
    EXPECT_THROW(chsh_quantum_behavior(1.5), DomainError);
    EXPECT_THROW(chsh_quantum_behavior(-0.1), DomainError);
}

TEST(chsh_quantum_behavior, value_interpolates_linearly) {
    const auto chsh = chsh_inequality();
    for (double v : {0.0, 0.5, 0.9, 1.0}) {
        EXPECT_NEAR(evaluate_bell(chsh, chsh_quantum_behavior(v)), 2.0 + ((2.0 + std::numbers::sqrt2) - 2.0) * v,
                    1e-12);
    }
}

TEST(evaluate_bell, additivity_over_contexts) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto t = static_cast<std::uint32_t>(trial);
        const Shape s{2 + t % 3, 1 + t % 4, 2 + t % 2, 3};
        const auto ineq = random_inequality(rng, s);
        const auto beh = random_behavior(rng, s);
        double sum = 0.0;
        for (const Context& j : ineq.contexts()) sum += context_term(ineq, beh, j).value;
        const double beta = evaluate_bell(ineq, beh);
        EXPECT_NEAR(sum, beta, 1e-10 * std::max(1.0, std::abs(beta)));
    }
}

TEST(evaluate_bell, linear_in_behavior) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Shape s{3, 2, 2, 2};
        const auto ineq = random_inequality(rng, s);
        const auto p1 = random_behavior(rng, s);
        const auto p2 = random_behavior(rng, s);
        const double t = unit(rng);
        EXPECT_NEAR(evaluate_bell(ineq, mix(p1, p2, t)),
                    t * evaluate_bell(ineq, p1) + (1.0 - t) * evaluate_bell(ineq, p2), 1e-10);
    }
}
