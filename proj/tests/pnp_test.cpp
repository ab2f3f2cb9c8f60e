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

#include "sbell/pnp.hpp"

#include <cmath>
#include <numbers>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "sbell/montecarlo.hpp"

using namespace sbell;
using namespace sbell::pnp;

namespace {

const double kQ = 2.0 + std::numbers::sqrt2;

bool within_table_band(double computed, double printed) {
    return std::abs(computed - printed) <= std::max(0.10 * printed, 0.002);
}

}  // namespace

TEST(penalty_kappa, reference_values) {
    EXPECT_DOUBLE_EQ(penalty_kappa(1), 1.0);
    EXPECT_DOUBLE_EQ(penalty_kappa(2), 14.0);
    EXPECT_DOUBLE_EQ(penalty_kappa(14), 2159841173504.0);
    EXPECT_NEAR(penalty_kappa(14), 2.16e12, 0.01e12);
    EXPECT_DOUBLE_EQ(penalty_kappa(3, 5.0, 3.0), 4.0 * (125.0 - 27.0));
    EXPECT_THROW(penalty_kappa(3, 2.0, 3.0), DomainError);
    EXPECT_THROW(penalty_kappa(0), DomainError);
}

TEST(single_copy_values, reference_values) {
    const auto v1 = single_copy_values(1.0);
    EXPECT_NEAR(v1.quantum, kQ, 1e-12);
    EXPECT_DOUBLE_EQ(v1.alice_marginal, 2.0);
    EXPECT_DOUBLE_EQ(v1.bob_marginal, 2.0);
    EXPECT_NEAR(single_copy_values(0.9).quantum, 3.272, 1e-3);
    EXPECT_NEAR(single_copy_values(0.0).quantum, 2.0, 1e-12);
}

// With Bob's outcome fixed to 0 and p(a|x) = 1/2, sum_{x,y} p(a = xy | x) = 2.
TEST(single_copy_values, marginal_term_by_enumeration) {
    double a_term = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a) {
                double marg = 0.0;
                for (int b = 0; b < 2; ++b) marg += oracle::chsh_quantum_probability(a, b, x, y, 1.0);
                a_term += marg * oracle::chsh_coefficient(a, 0, x, y);
            }
    EXPECT_NEAR(a_term, single_copy_values(1.0).alice_marginal, 1e-12);
}

TEST(pnp_model, sizes) {
    const auto m = make_model(14, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(m.settings_per_party(), 16384.0);
    EXPECT_DOUBLE_EQ(m.num_contexts(), std::pow(4.0, 14));
    EXPECT_DOUBLE_EQ(m.local_bound_n(), std::pow(3.0, 14));
    EXPECT_DOUBLE_EQ(m.penalty_kappa, penalty_kappa(14));
}

TEST(pnp_quantum_value, reference_values) {
    for (int n : {1, 5, 14}) {
        for (double v : {0.0, 0.6, 1.0}) EXPECT_NEAR(pnp_quantum_value(n, 0.0, v), std::pow(3.0, n), 1e-9);
    }
    EXPECT_NEAR(pnp_quantum_value(14, 1.0, 1.0), std::pow(kQ, 14), 1e-6);
    EXPECT_NEAR(pnp_quantum_value(14, 1.0, 1.0), 2.93e7, 0.01e7);
    EXPECT_NEAR(pnp_quantum_value(14, 0.28, 1.0) / std::pow(3.0, 14), 1.0, 0.01);
    EXPECT_THROW(pnp_quantum_value(0, 0.5, 1.0), DomainError);
    EXPECT_THROW(pnp_quantum_value(3, 1.5, 1.0), DomainError);
}

TEST(pnp_quantum_value, product_structure) {
    for (int n = 1; n <= 20; ++n)
        for (double v : {0.0, 0.5, 0.9, 1.0}) {
            const double expected = std::pow(pnp_quantum_value(1, 1.0, v), n);
            EXPECT_NEAR(pnp_quantum_value(n, 1.0, v), expected, 1e-12 * expected);
        }
}

// Single copy: the closed form matches both the library's detector simulation
// and an independent enumeration of click patterns.
TEST(pnp_quantum_value, single_copy_matches_binning) {
    const auto chsh = chsh_inequality();
    for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0})
        for (double v : {0.0, 0.5, 1.0}) {
            const double closed = pnp_quantum_value(1, eta, v);
            EXPECT_NEAR(closed, oracle::binned_chsh_value(eta, v), 1e-9);
            const auto binned = mc::simulate_detector(chsh_quantum_behavior(1.0), {eta, 0, v});
            EXPECT_NEAR(closed, evaluate_bell(chsh, binned), 1e-9);
        }
}

TEST(pnp_quantum_value, dense_product_matches_closed_form) {
    const auto chsh = chsh_inequality();
    for (int n = 1; n <= 3; ++n)
        for (double eta : {0.3, 0.8, 1.0})
            for (double v : {0.5, 1.0}) {
                const auto single = mc::simulate_detector(chsh_quantum_behavior(1.0), {1.0, 0, v});
                if (eta == 1.0) {
                    const auto joint = product_behavior(single, n);
                    EXPECT_NEAR(evaluate_bell(product_inequality(chsh, n), joint), pnp_quantum_value(n, 1.0, v),
                                1e-9);
                }
                const mc::ProductInstance inst(chsh, chsh_quantum_behavior(1.0), n, {eta, 0, v});
                EXPECT_NEAR(inst.bell_value(), pnp_quantum_value(n, eta, v), 1e-9);
            }
}

TEST(fraction_required, table_rows) {
    EXPECT_TRUE(within_table_band(fraction_required(14, 0.40, 1.0, 3e-5), 0.081));
    EXPECT_TRUE(within_table_band(fraction_required(14, 0.80, 1.0, 3e-5), 0.003));
    EXPECT_NEAR(fraction_required(10, 1.0, 0.9, 3e-5), 0.70, 0.005);
    EXPECT_GT(fraction_required(9, 1.0, 0.9, 3e-5), 1.0);
}

TEST(fraction_required, matches_chebyshev_ratio) {
    const auto m = make_model(12, 0.7, 1.0);
    const double beta = m.effective_value();
    const double eps = beta - m.local_bound_n();
    EXPECT_NEAR(fraction_required(12, 0.7, 1.0, 3e-5), beta / (eps * eps * 3e-5), 1e-12);
    EXPECT_NEAR(fraction_required(12, 0.7, 1.0, 3e-5, 0.0, {.safety = 0.5}),
                4.0 * fraction_required(12, 0.7, 1.0, 3e-5), 1e-9);
}

TEST(fraction_required, no_violation) {
    EXPECT_THROW(fraction_required(14, 0.2, 1.0, 3e-5), NoViolationError);
    EXPECT_THROW(fraction_required(5, 1.0, 0.0, 3e-5), NoViolationError);
    EXPECT_THROW(fraction_required(14, 0.5, 1.0, 0.0), DomainError);
}

TEST(fraction_required, decreasing_in_efficiency) {
    for (int n : {10, 12, 14}) {
        double prev = INFINITY;
        for (double eta = critical_efficiency(n, 1.0) + 0.01; eta <= 1.0; eta += 0.01) {
            const double nu = fraction_required(n, eta, 1.0, 3e-5);
            EXPECT_LT(nu, prev) << "n=" << n << " eta=" << eta;
            prev = nu;
        }
    }
}

TEST(min_efficiency, reference_values) {
    EXPECT_NEAR(min_efficiency(14, 1.0, 1.0, 3e-5), 0.28, 0.005);
    EXPECT_NEAR(min_efficiency(10, 1.0, 1.0, 3e-5), 0.43, 0.005);
    EXPECT_NEAR(min_efficiency(14, 0.081, 1.0, 3e-5), 0.40, 0.005);
    EXPECT_NEAR(min_efficiency(13, 1.0, 1.0, 3e-5), 0.31, 0.005);
}

TEST(min_efficiency, inverts_fraction) {
    for (int n : {13, 14})
        for (double nu : {0.9, 0.3, 0.05, 0.01}) {
            const double eta = min_efficiency(n, nu, 1.0, 3e-5);
            EXPECT_LE(fraction_required(n, std::min(1.0, eta + 1e-8), 1.0, 3e-5), nu * (1.0 + 1e-6));
            EXPECT_GT(fraction_required(n, eta - 1e-6, 1.0, 3e-5), nu);
        }
}

TEST(min_efficiency, decreasing_in_fraction) {
    for (int n : {13, 14}) {
        double prev = 0.0;
        for (double nu : {0.9, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01}) {
            const double eta = min_efficiency(n, nu, 1.0, 3e-5);
            EXPECT_GT(eta, prev);
            prev = eta;
        }
        EXPECT_LT(min_efficiency(n, 1.0, 1.0, 3e-5), min_efficiency(n, 0.9, 1.0, 3e-5));
    }
}

TEST(min_efficiency, errors) {
    EXPECT_THROW(min_efficiency(14, 0.0, 1.0, 3e-5), DomainError);
    EXPECT_THROW(min_efficiency(14, 1.5, 1.0, 3e-5), DomainError);
    EXPECT_THROW(min_efficiency(3, 0.5, 1.0, 3e-5), InfeasibleError);
    EXPECT_THROW(min_efficiency(3, 1.0, 0.0, 3e-5), InfeasibleError);
}

TEST(critical_efficiency, at_threshold) {
    for (int n = 2; n <= 20; ++n) {
        const double eta = critical_efficiency(n, 1.0);
        EXPECT_NEAR(pnp_quantum_value(n, eta, 1.0) / std::pow(3.0, n), 1.0, 1e-7);
    }
}

TEST(min_n_for_subset, reference_values) {
    EXPECT_EQ(min_n_for_subset(0.9, 3e-5), 10);
    EXPECT_LE(min_n_for_subset(1.0, 3e-5), 10);
    EXPECT_THROW(min_n_for_subset(0.0, 3e-5), NotFoundError);
}

TEST(penalty, violation_survives_at_fourteen_copies) {
    const auto m = make_model(14, 1.0, 0.9, 1e-6);
    EXPECT_GT(m.effective_value(), std::pow(3.0, 14));
    EXPECT_TRUE(m.violates());
    EXPECT_NO_THROW(fraction_required(14, 1.0, 0.9, 3e-5, 1e-6));
    EXPECT_NEAR(m.effective_value(), std::pow(3.272, 14) - 2159841173504.0 * 1e-6, 1e5);
}

TEST(penalty_sum, products_have_zero_penalty) {
    for (int n = 1; n <= 4; ++n)
        for (double v : {0.0, 0.7, 1.0}) {
            const auto joint = product_behavior(chsh_quantum_behavior(v), n);
            EXPECT_NEAR(penalty_sum(marginals_of(joint, n)), 0.0, 1e-12);
        }
}

TEST(penalty_sum, single_copy_has_no_pairs) {
    MarginalTables m{1, {0.3, 0.7, 0.9, 0.1}, {0.2, 0.8, 0.6, 0.4}};
    EXPECT_DOUBLE_EQ(penalty_sum(m), 0.0);
}

TEST(penalty_sum, two_copy_perturbation_matches_enumeration) {
    // Alice's slot-0 marginal shifts by 0.01 with the slot-1 setting, for both slot-0 settings.
    auto p0 = [](std::uint32_t x, int slot) { return slot == 0 ? 0.5 + 0.01 * ((x >> 1) & 1u) : 0.5; };
    MarginalTables m;
    m.n = 2;
    m.alice.resize(m.expected_size());
    m.bob.assign(m.expected_size(), 0.5);
    for (std::uint32_t x = 0; x < 4; ++x)
        for (int i = 0; i < 2; ++i) {
            m.alice[(x * 2 + i) * 2] = p0(x, i);
            m.alice[(x * 2 + i) * 2 + 1] = 1.0 - p0(x, i);
        }
    const double oracle_value = oracle::penalty_enumerated(2, [&](const std::vector<int>& xv, int slot) {
        return p0(static_cast<std::uint32_t>(xv[0] | (xv[1] << 1)), slot);
    });
    EXPECT_NEAR(penalty_sum(m), oracle_value, 1e-15);
    EXPECT_NEAR(penalty_sum(m), 2.0 * (2.0 * 0.01), 1e-15);
}

TEST(penalty_sum, random_tables_match_enumeration) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 1; n <= 4; ++n) {
        MarginalTables m;
        m.n = n;
        m.alice.resize(m.expected_size());
        m.bob.resize(m.expected_size());
        for (auto* t : {&m.alice, &m.bob})
            for (std::size_t k = 0; k < t->size(); k += 2) {
                (*t)[k] = unit(rng);
                (*t)[k + 1] = 1.0 - (*t)[k];
            }
        auto lookup = [&](const std::vector<double>& t) {
            return [&t, n](const std::vector<int>& xv, int slot) {
                std::uint32_t x = 0;
                for (int i = 0; i < n; ++i) x |= static_cast<std::uint32_t>(xv[i]) << i;
                return t[(x * n + slot) * 2];
            };
        };
        const double expected =
            oracle::penalty_enumerated(n, lookup(m.alice)) + oracle::penalty_enumerated(n, lookup(m.bob));
        EXPECT_NEAR(penalty_sum(m), expected, 1e-12);
    }
}

TEST(penalty_sum, errors) {
    MarginalTables m{2, std::vector<double>(15, 0.5), std::vector<double>(16, 0.5)};
    EXPECT_THROW(penalty_sum(m), IncompleteTableError);
    m.alice.assign(16, 0.5);
    m.alice[0] = 0.9;
    EXPECT_THROW(penalty_sum(m), InvalidBehaviorError);
    EXPECT_THROW(penalty_sum(MarginalTables{11, {}, {}}), DomainError);
    EXPECT_THROW(product_shape(5), TooLargeError);
}
