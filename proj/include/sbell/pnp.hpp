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

// Penalized n-product (PNP) CHSH inequalities.
//
// n copies of CHSH are evaluated in parallel; a party's setting is an n-bit
// vector (bit i is the setting of copy i), so there are 2^n settings per party
// and M = 4^n contexts. A marginal-consistency penalty kappa * (A + B) keeps the
// local bound at C^n.
//
// Detection: every party clicks with probability eta; a no-click is binned to
// the fixed outcome 0 on all copies. The Bell value of the binned statistics is
//
//     eta^2 Q^n + eta (1 - eta) (A^n + B^n) + (1 - eta)^2 C^n
//
// where A and B are single-copy values with the other party's outcome fixed.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sbell/bell_core.hpp"
#include "sbell/errors.hpp"

namespace sbell::pnp {

inline constexpr double kLocalBound = 3.0;
inline constexpr double kAlgebraicBound = 4.0;
/// Largest n for which tables indexed by setting vectors are materialized.
inline constexpr int kMaxTabulatedCopies = 10;
/// Search cap for min_n_for_subset.
inline constexpr int kMaxCopies = 64;

struct SingleCopyValues {
    double quantum = 0.0;
    double alice_marginal = 0.0;
    double bob_marginal = 0.0;
};

/// Q(V) = 2 + sqrt(2) V; A = B = 2 since the optimal strategy has uniform marginals.
inline SingleCopyValues single_copy_values(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0,1]");
    return {2.0 + std::numbers::sqrt2 * visibility, 2.0, 2.0};
}

/// kappa = 2^(n-1) (sigma^n - c^n); sigma^n is the algebraic bound of the product.
inline double penalty_kappa(int n, double sigma = kAlgebraicBound, double c = kLocalBound) {
    if (n < 1) throw DomainError("number of copies must be at least 1");
    if (!(sigma >= c)) throw DomainError("algebraic bound below local bound");
    return std::ldexp(std::pow(sigma, n) - std::pow(c, n), n - 1);
}

struct PnpModel {
    int n = 1;
    double visibility = 1.0;
    double efficiency = 1.0;
    SingleCopyValues single_copy;
    double local_bound = kLocalBound;
    double algebraic_bound = kAlgebraicBound;
    double penalty_kappa = 0.0;
    double penalty_sum = 0.0;

    [[nodiscard]] double settings_per_party() const { return std::ldexp(1.0, n); }
    [[nodiscard]] double num_contexts() const { return std::ldexp(1.0, 2 * n); }
    [[nodiscard]] double local_bound_n() const { return std::pow(local_bound, n); }

    /// Binned Bell value without the penalty term.
    [[nodiscard]] double quantum_value() const {
        const double eta = efficiency;
        return eta * eta * std::pow(single_copy.quantum, n) +
               eta * (1.0 - eta) *
                   (std::pow(single_copy.alice_marginal, n) + std::pow(single_copy.bob_marginal, n)) +
               (1.0 - eta) * (1.0 - eta) * local_bound_n();
    }
    [[nodiscard]] double effective_value() const { return quantum_value() - penalty_kappa * penalty_sum; }
    [[nodiscard]] bool violates() const { return effective_value() > local_bound_n(); }
};

inline PnpModel make_model(int n, double efficiency, double visibility, double penalty_sum = 0.0,
                           double sigma = kAlgebraicBound) {
    if (n < 1 || n > kMaxCopies) throw DomainError("number of copies must lie in [1, 64]");
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw DomainError("efficiency must lie in [0,1]");
    if (!(penalty_sum >= 0.0)) throw DomainError("penalty sum must be nonnegative");
    PnpModel m;
    m.n = n;
    m.visibility = visibility;
    m.efficiency = efficiency;
    m.single_copy = single_copy_values(visibility);
    m.algebraic_bound = sigma;
    m.penalty_kappa = penalty_kappa(n, sigma, kLocalBound);
    m.penalty_sum = penalty_sum;
    return m;
}

inline double pnp_quantum_value(int n, double efficiency, double visibility) {
    return make_model(n, efficiency, visibility).quantum_value();
}

struct FractionOptions {
    /// Multiplies the margin beta_eff - C^n used as epsilon.
    double safety = 1.0;
    double sigma = kAlgebraicBound;
};

/// nu = beta_eff / (eps^2 delta) with eps = beta_eff - C^n. Not clamped: values
/// above 1 mean a strict subset cannot certify the violation.
inline double fraction_required(int n, double efficiency, double visibility, double delta,
                                double penalty_sum = 0.0, FractionOptions opts = {}) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(opts.safety > 0.0 && opts.safety <= 1.0)) throw DomainError("safety factor must lie in (0,1]");
    const PnpModel m = make_model(n, efficiency, visibility, penalty_sum, opts.sigma);
    const double beta = m.effective_value();
    const double margin = beta - m.local_bound_n();
    if (!(margin > 0.0)) throw NoViolationError("no violation for these parameters");
    const double eps = opts.safety * margin;
    return beta / (eps * eps * delta);
}

namespace detail {

inline constexpr double kBisectionTolerance = 1e-9;

/// Smallest eta in (0,1] satisfying a predicate that is false below some
/// threshold and true above it.
template <class Pred>
double bisect_efficiency(Pred ok) {
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > kBisectionTolerance) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace detail

/// Critical efficiency with every context evaluated: the smallest eta whose
/// binned (and penalized) value exceeds C^n.
inline double critical_efficiency(int n, double visibility, double penalty_sum = 0.0) {
    if (!make_model(n, 1.0, visibility, penalty_sum).violates()) {
        throw NoViolationError("no violation even at unit efficiency");
    }
    return detail::bisect_efficiency(
        [&](double eta) { return make_model(n, eta, visibility, penalty_sum).violates(); });
}

/// Smallest eta whose Chebyshev fraction is at most nu, for any nu > 0.
inline double sampled_min_efficiency(int n, double nu, double visibility, double delta) {
    if (!(nu > 0.0)) throw DomainError("fraction must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    auto ok = [&](double eta) {
        const PnpModel m = make_model(n, eta, visibility);
        return m.violates() && fraction_required(n, eta, visibility, delta) <= nu;
    };
    if (!ok(1.0)) throw InfeasibleError("fraction unreachable even at unit efficiency");
    return detail::bisect_efficiency(ok);
}

/// Minimum efficiency to certify with a fraction nu of the contexts. At nu = 1
/// every context is evaluated exactly, so no sampling term applies and the
/// result is the critical efficiency.
inline double min_efficiency(int n, double nu, double visibility, double delta) {
    if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("fraction must lie in (0,1]");
    if (nu == 1.0) {
        try {
            return critical_efficiency(n, visibility);
        } catch (const NoViolationError& e) {
            throw InfeasibleError(e.what());
        }
    }
    return sampled_min_efficiency(n, nu, visibility, delta);
}

/// Smallest n whose fraction at unit efficiency drops below 1.
inline int min_n_for_subset(double visibility, double delta, int cap = kMaxCopies) {
    for (int n = 1; n <= cap; ++n) {
        if (!make_model(n, 1.0, visibility).violates()) continue;
        if (fraction_required(n, 1.0, visibility, delta) < 1.0) return n;
    }
    throw NotFoundError("no n up to the cap gives a fraction below 1");
}

/// Slot marginals of each party: alice[(x * n + i) * 2 + a] = p(a_i = a | x),
/// where x is Alice's setting vector.
struct MarginalTables {
    int n = 0;
    std::vector<double> alice;
    std::vector<double> bob;

    [[nodiscard]] std::size_t expected_size() const { return (std::size_t{1} << n) * n * 2; }
    [[nodiscard]] double alice_at(std::uint32_t x, int slot, std::uint32_t a) const {
        return alice[(std::size_t{x} * n + slot) * 2 + a];
    }
    [[nodiscard]] double bob_at(std::uint32_t y, int slot, std::uint32_t b) const {
        return bob[(std::size_t{y} * n + slot) * 2 + b];
    }
};

namespace detail {

inline double party_penalty(const std::vector<double>& table, int n) {
    const std::uint32_t settings = 1u << n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const std::uint32_t bit = 1u << i;
        for (std::uint32_t x = 0; x < settings; ++x) {
            for (std::uint32_t xp = 0; xp < settings; ++xp) {
                if (xp == x || ((x ^ xp) & bit) != 0) continue;
                total += std::abs(table[(std::size_t{x} * n + i) * 2] - table[(std::size_t{xp} * n + i) * 2]);
            }
        }
    }
    return total;
}

}  // namespace detail

/// A + B: for every slot i and ordered pair of setting vectors x != x' that agree
/// on slot i, |p(a_i = 0 | x) - p(a_i = 0 | x')|, summed over both parties.
inline double penalty_sum(const MarginalTables& marg) {
    if (marg.n < 1 || marg.n > kMaxTabulatedCopies) throw DomainError("tabulated penalty needs 1 <= n <= 10");
    if (marg.alice.size() != marg.expected_size() || marg.bob.size() != marg.expected_size()) {
        throw IncompleteTableError("marginal tables do not cover every setting vector");
    }
    for (const auto* t : {&marg.alice, &marg.bob}) {
        for (std::size_t k = 0; k < t->size(); k += 2) {
            const double p0 = (*t)[k];
            const double p1 = (*t)[k + 1];
            if (!(p0 >= 0.0 && p1 >= 0.0 && p0 + p1 <= 1.0 + kNormalizationTolerance)) {
                throw InvalidBehaviorError("slot marginal outside the probability simplex");
            }
        }
    }
    return detail::party_penalty(marg.alice, marg.n) + detail::party_penalty(marg.bob, marg.n);
}

inline Shape product_shape(int n) {
    if (n < 1 || n > 4) throw TooLargeError("dense n-copy tables are limited to n <= 4");
    const std::uint32_t s = 1u << n;
    return {s, s, s, s};
}

/// n-fold product p(a,b|x,y) = prod_i p1(a_i,b_i|x_i,y_i) of a binary 2x2 behavior.
inline Behavior product_behavior(const Behavior& single, int n) {
    if (!(single.shape() == kBinaryTwoSetting)) throw DomainError("product needs a binary two-setting behavior");
    const Shape s = product_shape(n);
    std::vector<double> p(s.table_size());
    for (std::uint32_t x = 0; x < s.settings_a; ++x)
        for (std::uint32_t y = 0; y < s.settings_b; ++y)
            for (std::uint32_t a = 0; a < s.outcomes_a; ++a)
                for (std::uint32_t b = 0; b < s.outcomes_b; ++b) {
                    double v = 1.0;
                    for (int i = 0; i < n; ++i) {
                        v *= single((a >> i) & 1u, (b >> i) & 1u, (x >> i) & 1u, (y >> i) & 1u);
                    }
                    p[s.index(a, b, x, y)] = v;
                }
    return Behavior(s, std::move(p));
}

/// Unpenalized n-fold product of CHSH as a dense inequality: C^n and 4^n bounds.
inline BellInequality product_inequality(const BellInequality& single, int n) {
    if (!(single.shape() == kBinaryTwoSetting)) throw DomainError("product needs a binary two-setting inequality");
    const Shape s = product_shape(n);
    std::vector<double> c(s.table_size());
    for (std::uint32_t x = 0; x < s.settings_a; ++x)
        for (std::uint32_t y = 0; y < s.settings_b; ++y)
            for (std::uint32_t a = 0; a < s.outcomes_a; ++a)
                for (std::uint32_t b = 0; b < s.outcomes_b; ++b) {
                    double v = 1.0;
                    for (int i = 0; i < n; ++i) {
                        v *= single.coefficient((a >> i) & 1u, (b >> i) & 1u, (x >> i) & 1u, (y >> i) & 1u);
                    }
                    c[s.index(a, b, x, y)] = v;
                }
    return BellInequality(s, std::move(c), std::pow(single.local_bound(), n),
                          std::pow(single.algebraic_bound(), n));
}

/// Slot marginals of an n-copy behavior, read with the other party's setting
/// vector fixed to 0.
inline MarginalTables marginals_of(const Behavior& joint, int n) {
    const Shape s = product_shape(n);
    if (!(joint.shape() == s)) throw IncompleteTableError("behavior shape does not match n copies");
    MarginalTables m;
    m.n = n;
    m.alice.assign(m.expected_size(), 0.0);
    m.bob.assign(m.expected_size(), 0.0);
    for (std::uint32_t x = 0; x < s.settings_a; ++x)
        for (std::uint32_t a = 0; a < s.outcomes_a; ++a)
            for (std::uint32_t b = 0; b < s.outcomes_b; ++b) {
                const double pa = joint(a, b, x, 0);
                const double pb = joint(a, b, 0, x);
                for (int i = 0; i < n; ++i) {
                    m.alice[(std::size_t{x} * n + i) * 2 + ((a >> i) & 1u)] += pa;
                    m.bob[(std::size_t{x} * n + i) * 2 + ((b >> i) & 1u)] += pb;
                }
            }
    return m;
}

}  // namespace sbell::pnp
