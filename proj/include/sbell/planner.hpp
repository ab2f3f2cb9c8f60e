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

// Sample-complexity planning for evaluating a Bell functional on a random
// subset of its contexts.
//
// Context sampling: the single-draw estimator X = M * beta_j under uniform j
// is unbiased with Var(X) <= M * beta whenever every 0 <= beta_j <= 1. With
// lambda = 1/sqrt(delta), Chebyshev gives p(|Y - beta| >= eps) <= delta once
//
//     L >= M * beta / (eps^2 * delta).
//
// Per-context rounds: with single-round values bounded by b, Hoeffding gives
// p(B_j - beta_j >= eps') <= delta' once K >= -ln(delta') * b^2 / (2 eps'^2).

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "sbell/bell_core.hpp"
#include "sbell/errors.hpp"

namespace sbell {

namespace detail {

/// Ceiling that treats values within a few ulps of an integer as that integer,
/// so closed forms that are exact in real arithmetic (e.g. -ln(e^-2)/2 = 1) do not round up.
inline double ceil_exact(double v) {
    const double r = std::round(v);
    if (std::abs(v - r) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v))) {
        return r;
    }
    return std::ceil(v);
}

inline std::uint64_t to_count(double v, const char* what) {
    if (!(v < 18446744073709549568.0)) throw DomainError(std::string(what) + " overflows a 64-bit count");
    return static_cast<std::uint64_t>(v);
}

}  // namespace detail

struct RoundsPlan {
    double epsilon_prime = 0.0;
    double delta_prime = 0.0;
    double per_round_bound = 1.0;
    std::uint64_t rounds = 0;
};

struct SamplingPlan {
    double epsilon = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    std::uint64_t num_contexts = 0;
    std::uint64_t contexts_required = 0;
    /// contexts_required / num_contexts, after ceiling.
    double fraction = 0.0;
    bool feasible = false;
    std::optional<RoundsPlan> rounds;
};

struct PlanOptions {
    /// Multiplies epsilon before planning; 1 reproduces the borderline margin.
    double safety = 1.0;
};

inline SamplingPlan chebyshev_plan(std::uint64_t num_contexts, double beta, double epsilon,
                                   double delta, PlanOptions opts = {}) {
    if (num_contexts < 1) throw DomainError("need at least one context");
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(opts.safety > 0.0 && opts.safety <= 1.0)) throw DomainError("safety factor must lie in (0,1]");

    SamplingPlan plan;
    plan.epsilon = epsilon * opts.safety;
    plan.delta = delta;
    plan.lambda = 1.0 / std::sqrt(delta);
    plan.num_contexts = num_contexts;
    const double m = static_cast<double>(num_contexts);
    const double raw = m * beta / (plan.epsilon * plan.epsilon * delta);
    plan.contexts_required = detail::to_count(detail::ceil_exact(raw), "context count");
    plan.fraction = static_cast<double>(plan.contexts_required) / m;
    plan.feasible = plan.contexts_required <= num_contexts;
    return plan;
}

inline std::uint64_t rounds_required(double epsilon_prime, double delta_prime, double per_round_bound) {
    if (!(epsilon_prime > 0.0)) throw DomainError("epsilon' must be positive");
    if (!(delta_prime > 0.0 && delta_prime < 1.0)) throw DomainError("delta' must lie in (0,1)");
    if (!(per_round_bound > 0.0)) throw DomainError("per-round bound must be positive");
    const double k = -std::log(delta_prime) * per_round_bound * per_round_bound /
                     (2.0 * epsilon_prime * epsilon_prime);
    return std::max<std::uint64_t>(1, detail::to_count(detail::ceil_exact(k), "round count"));
}

inline SamplingPlan with_rounds(SamplingPlan plan, double epsilon_prime, double delta_prime,
                                double per_round_bound) {
    plan.rounds = RoundsPlan{epsilon_prime, delta_prime, per_round_bound,
                             rounds_required(epsilon_prime, delta_prime, per_round_bound)};
    return plan;
}

struct SubsetEstimate {
    std::vector<Context> chosen_contexts;
    std::vector<double> estimator_values;
    double mean = 0.0;
};

enum class Draws { distinct, with_replacement };

/// X_l = M * beta_{j_l}, Y = mean of X_l.
inline SubsetEstimate estimate_from_subset(std::span<const ContextValue> values,
                                           std::uint64_t num_contexts,
                                           Draws draws = Draws::distinct) {
    if (values.empty()) throw EmptyInputError("no context values supplied");
    if (draws == Draws::distinct) {
        std::set<Context> seen;
        for (const auto& v : values) {
            if (!seen.insert(v.context).second) {
                throw DuplicateContextError("context " + to_string(v.context) + " supplied twice");
            }
        }
    }
    SubsetEstimate est;
    est.chosen_contexts.reserve(values.size());
    est.estimator_values.reserve(values.size());
    const double m = static_cast<double>(num_contexts);
    double sum = 0.0;
    for (const auto& v : values) {
        est.chosen_contexts.push_back(v.context);
        est.estimator_values.push_back(m * v.value);
        sum += m * v.value;
    }
    est.mean = sum / static_cast<double>(values.size());
    return est;
}

/// Exact variance of the single-draw estimator under uniform context choice:
/// M * sum_j beta_j^2 - beta^2.
inline double single_draw_variance(std::span<const ContextValue> all_terms) {
    const double m = static_cast<double>(all_terms.size());
    double beta = 0.0;
    double sq = 0.0;
    for (const auto& t : all_terms) {
        beta += t.value;
        sq += t.value * t.value;
    }
    return m * sq - beta * beta;
}

enum class Decision { violation_certified, inconclusive };

inline Decision certify(double estimate, double epsilon, double local_bound) {
    return estimate - epsilon > local_bound ? Decision::violation_certified : Decision::inconclusive;
}

inline const char* to_string(Decision d) {
    return d == Decision::violation_certified ? "violation-certified" : "inconclusive";
}

}  // namespace sbell
