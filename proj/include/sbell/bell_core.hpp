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

// Bipartite Bell functionals of the linear form
//
//     beta = sum_{a,b,x,y} c[a,b,x,y] * p(a,b|x,y) = sum_j beta_j
//
// where a context j is a pair (x, y) of local settings. Tables are dense and
// indexed as ((x * settings_b + y) * outcomes_a + a) * outcomes_b + b.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sbell/errors.hpp"

namespace sbell {

/// Absolute tolerance for per-context normalization of behaviors.
inline constexpr double kNormalizationTolerance = 1e-12;

struct Context {
    std::uint32_t x = 0;
    std::uint32_t y = 0;

    friend constexpr bool operator==(const Context&, const Context&) = default;
    friend constexpr auto operator<=>(const Context&, const Context&) = default;
};

inline std::string to_string(const Context& j) {
    return "(" + std::to_string(j.x) + "," + std::to_string(j.y) + ")";
}

/// Alphabet sizes of a bipartite scenario.
struct Shape {
    std::uint32_t settings_a = 0;
    std::uint32_t settings_b = 0;
    std::uint32_t outcomes_a = 0;
    std::uint32_t outcomes_b = 0;

    friend constexpr bool operator==(const Shape&, const Shape&) = default;

    [[nodiscard]] constexpr std::size_t outcome_pairs() const {
        return std::size_t{outcomes_a} * outcomes_b;
    }
    [[nodiscard]] constexpr std::size_t table_size() const {
        return std::size_t{settings_a} * settings_b * outcome_pairs();
    }
    [[nodiscard]] constexpr std::size_t index(std::uint32_t a, std::uint32_t b, std::uint32_t x,
                                              std::uint32_t y) const {
        return ((std::size_t{x} * settings_b + y) * outcomes_a + a) * outcomes_b + b;
    }
    [[nodiscard]] constexpr std::size_t context_offset(const Context& j) const {
        return (std::size_t{j.x} * settings_b + j.y) * outcome_pairs();
    }
    [[nodiscard]] constexpr bool has_context(const Context& j) const {
        return j.x < settings_a && j.y < settings_b;
    }
};

/// Joint conditional probabilities p(a,b|x,y). Validated on construction.
class Behavior {
   public:
    Behavior(Shape shape, std::vector<double> probs) : shape_(shape), probs_(std::move(probs)) {
        if (probs_.size() != shape_.table_size()) {
            throw InvalidBehaviorError("behavior table has " + std::to_string(probs_.size()) +
                                       " entries, expected " +
                                       std::to_string(shape_.table_size()));
        }
        for (std::uint32_t x = 0; x < shape_.settings_a; ++x) {
            for (std::uint32_t y = 0; y < shape_.settings_b; ++y) {
                const Context j{x, y};
                double total = 0.0;
                for (double p : context_probs(j)) {
                    if (!(p >= 0.0) || p > 1.0 + kNormalizationTolerance) {
                        throw InvalidBehaviorError("probability out of [0,1] in context " +
                                                   to_string(j));
                    }
                    total += p;
                }
                if (std::abs(total - 1.0) > kNormalizationTolerance) {
                    throw InvalidBehaviorError("context " + to_string(j) + " sums to " +
                                               std::to_string(total));
                }
            }
        }
    }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] const std::vector<double>& table() const { return probs_; }

    [[nodiscard]] double operator()(std::uint32_t a, std::uint32_t b, std::uint32_t x,
                                    std::uint32_t y) const {
        return probs_[shape_.index(a, b, x, y)];
    }

    /// Outcome-pair probabilities of one context, laid out as a * outcomes_b + b.
    [[nodiscard]] std::span<const double> context_probs(const Context& j) const {
        return {probs_.data() + shape_.context_offset(j), shape_.outcome_pairs()};
    }

    [[nodiscard]] double marginal_a(std::uint32_t a, const Context& j) const {
        double s = 0.0;
        for (std::uint32_t b = 0; b < shape_.outcomes_b; ++b) s += (*this)(a, b, j.x, j.y);
        return s;
    }
    [[nodiscard]] double marginal_b(std::uint32_t b, const Context& j) const {
        double s = 0.0;
        for (std::uint32_t a = 0; a < shape_.outcomes_a; ++a) s += (*this)(a, b, j.x, j.y);
        return s;
    }

   private:
    Shape shape_;
    std::vector<double> probs_;
};

/// A linear Bell functional with its local bound C and algebraic bound Sigma.
class BellInequality {
   public:
    BellInequality(Shape shape, std::vector<double> coefficients, double local_bound,
                   double algebraic_bound)
        : shape_(shape),
          coefficients_(std::move(coefficients)),
          local_bound_(local_bound),
          algebraic_bound_(algebraic_bound) {
        if (coefficients_.size() != shape_.table_size()) {
            throw DomainError("coefficient table size does not match the scenario shape");
        }
        if (!(local_bound_ <= algebraic_bound_)) {
            throw DomainError("local bound exceeds algebraic bound");
        }
        for (std::uint32_t x = 0; x < shape_.settings_a; ++x) {
            for (std::uint32_t y = 0; y < shape_.settings_b; ++y) {
                const Context j{x, y};
                const auto* first = coefficients_.data() + shape_.context_offset(j);
                if (std::any_of(first, first + shape_.outcome_pairs(),
                                [](double c) { return c != 0.0; })) {
                    contexts_.push_back(j);
                }
            }
        }
    }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] double local_bound() const { return local_bound_; }
    [[nodiscard]] double algebraic_bound() const { return algebraic_bound_; }
    /// Contexts with at least one nonzero coefficient, in (x, y) order.
    [[nodiscard]] const std::vector<Context>& contexts() const { return contexts_; }
    [[nodiscard]] std::size_t num_contexts() const { return contexts_.size(); }

    [[nodiscard]] double coefficient(std::uint32_t a, std::uint32_t b, std::uint32_t x,
                                     std::uint32_t y) const {
        return coefficients_[shape_.index(a, b, x, y)];
    }
    [[nodiscard]] std::span<const double> context_coefficients(const Context& j) const {
        return {coefficients_.data() + shape_.context_offset(j), shape_.outcome_pairs()};
    }

    [[nodiscard]] bool is_context(const Context& j) const {
        return std::binary_search(contexts_.begin(), contexts_.end(), j);
    }

    /// Largest |c| over all outcome pairs and contexts: the range of a single-round
    /// value of any Bell term.
    [[nodiscard]] double per_round_bound() const {
        double m = 0.0;
        for (double c : coefficients_) m = std::max(m, std::abs(c));
        return m;
    }

   private:
    Shape shape_;
    std::vector<double> coefficients_;
    double local_bound_;
    double algebraic_bound_;
    std::vector<Context> contexts_;
};

struct ContextValue {
    Context context;
    double value = 0.0;
};

namespace detail {

inline void check_compatible(const BellInequality& ineq, const Behavior& beh) {
    const Shape& s = ineq.shape();
    const Shape& t = beh.shape();
    if (s.outcomes_a != t.outcomes_a || s.outcomes_b != t.outcomes_b) {
        throw DomainError("behavior and inequality use different outcome alphabets");
    }
}

inline double dot_context(const BellInequality& ineq, const Behavior& beh, const Context& j) {
    if (!beh.shape().has_context(j)) {
        throw MissingContextError("behavior has no probabilities for context " + to_string(j));
    }
    auto c = ineq.context_coefficients(j);
    auto p = beh.context_probs(j);
    double s = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * p[k];
    return s;
}

}  // namespace detail

/// beta_j = sum_{a,b} c[a,b,j] p(a,b|j).
inline ContextValue context_term(const BellInequality& ineq, const Behavior& beh,
                                 const Context& j) {
    if (!ineq.is_context(j)) throw UnknownContextError("not a context of the inequality: " + to_string(j));
    detail::check_compatible(ineq, beh);
    return {j, detail::dot_context(ineq, beh, j)};
}

inline std::vector<ContextValue> context_terms(const BellInequality& ineq, const Behavior& beh) {
    detail::check_compatible(ineq, beh);
    std::vector<ContextValue> out;
    out.reserve(ineq.num_contexts());
    for (const Context& j : ineq.contexts()) out.push_back({j, detail::dot_context(ineq, beh, j)});
    return out;
}

inline double evaluate_bell(const BellInequality& ineq, const Behavior& beh) {
    double beta = 0.0;
    for (const auto& term : context_terms(ineq, beh)) beta += term.value;
    return beta;
}

inline constexpr Shape kBinaryTwoSetting{2, 2, 2, 2};

/// CHSH in probability form: c[a,b,x,y] = 1 iff a xor b == x*y. C = 3, Sigma = 4.
inline BellInequality chsh_inequality() {
    const Shape s = kBinaryTwoSetting;
    std::vector<double> c(s.table_size(), 0.0);
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t a = 0; a < 2; ++a)
                for (std::uint32_t b = 0; b < 2; ++b)
                    if ((a ^ b) == (x & y)) c[s.index(a, b, x, y)] = 1.0;
    return BellInequality(s, std::move(c), 3.0, 4.0);
}

/// Optimal CHSH qubit strategy on a maximally entangled state, mixed with white
/// noise at the given visibility. Marginals are uniform for every visibility.
inline Behavior chsh_quantum_behavior(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw DomainError("visibility must lie in [0,1]");
    }
    const Shape s = kBinaryTwoSetting;
    const double corr = visibility * std::numbers::sqrt2 / 2.0;
    std::vector<double> p(s.table_size());
    for (std::uint32_t x = 0; x < 2; ++x)
        for (std::uint32_t y = 0; y < 2; ++y)
            for (std::uint32_t a = 0; a < 2; ++a)
                for (std::uint32_t b = 0; b < 2; ++b) {
                    const double sign = ((a ^ b) == (x & y)) ? 1.0 : -1.0;
                    p[s.index(a, b, x, y)] = 0.25 * (1.0 + sign * corr);
                }
    return Behavior(s, std::move(p));
}

inline Behavior uniform_behavior(Shape s) {
    return Behavior(s, std::vector<double>(s.table_size(), 1.0 / static_cast<double>(s.outcome_pairs())));
}

/// Local deterministic strategy: Alice answers alice[x], Bob answers bob[y].
inline Behavior deterministic_behavior(Shape s, std::span<const std::uint32_t> alice,
                                       std::span<const std::uint32_t> bob) {
    if (alice.size() != s.settings_a || bob.size() != s.settings_b) {
        throw DomainError("deterministic strategy does not cover every setting");
    }
    std::vector<double> p(s.table_size(), 0.0);
    for (std::uint32_t x = 0; x < s.settings_a; ++x)
        for (std::uint32_t y = 0; y < s.settings_b; ++y) {
            if (alice[x] >= s.outcomes_a || bob[y] >= s.outcomes_b) {
                throw InvalidOutcomeError("deterministic answer outside the outcome alphabet");
            }
            p[s.index(alice[x], bob[y], x, y)] = 1.0;
        }
    return Behavior(s, std::move(p));
}

/// t * first + (1 - t) * second.
inline Behavior mix(const Behavior& first, const Behavior& second, double t) {
    if (!(first.shape() == second.shape())) throw DomainError("cannot mix behaviors of different shapes");
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("mixing weight must lie in [0,1]");
    std::vector<double> p(first.table().size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = t * first.table()[k] + (1.0 - t) * second.table()[k];
    return Behavior(first.shape(), std::move(p));
}

}  // namespace sbell
