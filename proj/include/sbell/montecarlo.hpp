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

// Seeded simulation of subset Bell tests, used to check the planner's
// guarantees empirically.
//
// Every trial owns a private generator seeded from (seed, trial index), so
// results do not depend on thread count or scheduling.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <unordered_set>
#include <vector>

#include "sbell/bell_core.hpp"
#include "sbell/errors.hpp"
#include "sbell/graph.hpp"
#include "sbell/planner.hpp"

namespace sbell::mc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` derived from a master seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from a discrete distribution given by its probabilities.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) return k;
        }
        // Rounding left a sliver above the cumulative sum; take the last nonzero cell.
        for (std::size_t k = probs.size(); k-- > 0;)
            if (probs[k] > 0.0) return k;
        return probs.size() - 1;
    }

   private:
    std::mt19937_64 engine_;
};

struct DetectorModel {
    double efficiency = 1.0;
    std::uint32_t bin_outcome = 0;
    double visibility = 1.0;

    void validate() const {
        if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw DomainError("efficiency must lie in [0,1]");
        if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in [0,1]");
    }
};

/// Exact behavior seen through the detectors. White noise is mixed in at the
/// model's visibility, then each party independently fails to click with
/// probability 1 - eta and reports bin_outcome instead.
inline Behavior simulate_detector(const Behavior& beh, const DetectorModel& det) {
    det.validate();
    const Shape& s = beh.shape();
    if (det.bin_outcome >= s.outcomes_a || det.bin_outcome >= s.outcomes_b) {
        throw InvalidOutcomeError("bin outcome outside the outcome alphabet");
    }
    const double eta = det.efficiency;
    const double noise = (1.0 - det.visibility) / static_cast<double>(s.outcome_pairs());
    const std::uint32_t bin = det.bin_outcome;
    std::vector<double> out(s.table_size(), 0.0);
    std::vector<double> pa(s.outcomes_a);
    std::vector<double> pb(s.outcomes_b);
    for (std::uint32_t x = 0; x < s.settings_a; ++x) {
        for (std::uint32_t y = 0; y < s.settings_b; ++y) {
            std::fill(pa.begin(), pa.end(), 0.0);
            std::fill(pb.begin(), pb.end(), 0.0);
            for (std::uint32_t a = 0; a < s.outcomes_a; ++a)
                for (std::uint32_t b = 0; b < s.outcomes_b; ++b) {
                    const double p = det.visibility * beh(a, b, x, y) + noise;
                    out[s.index(a, b, x, y)] += eta * eta * p;
                    pa[a] += p;
                    pb[b] += p;
                }
            for (std::uint32_t a = 0; a < s.outcomes_a; ++a) out[s.index(a, bin, x, y)] += eta * (1.0 - eta) * pa[a];
            for (std::uint32_t b = 0; b < s.outcomes_b; ++b) out[s.index(bin, b, x, y)] += eta * (1.0 - eta) * pb[b];
            out[s.index(bin, bin, x, y)] += (1.0 - eta) * (1.0 - eta);
        }
    }
    return Behavior(s, std::move(out));
}

/// Something a subset test can be run against: M contexts with exact terms
/// beta_j and a way to draw the single-round value of a term.
template <class T>
concept BellInstance = requires(const T& t, std::uint64_t k, Rng& rng) {
    { t.num_contexts() } -> std::convertible_to<std::uint64_t>;
    { t.context_value(k) } -> std::convertible_to<double>;
    { t.sample_round(k, rng) } -> std::convertible_to<double>;
    { t.bell_value() } -> std::convertible_to<double>;
    { t.local_bound() } -> std::convertible_to<double>;
    { t.per_round_bound() } -> std::convertible_to<double>;
};

/// Dense inequality and behavior; rounds are drawn from the joint table.
class DenseInstance {
   public:
    DenseInstance(BellInequality ineq, Behavior beh) : ineq_(std::move(ineq)), beh_(std::move(beh)) {
        terms_ = context_terms(ineq_, beh_);
        for (const auto& t : terms_) beta_ += t.value;
    }

    [[nodiscard]] std::uint64_t num_contexts() const { return terms_.size(); }
    [[nodiscard]] double context_value(std::uint64_t k) const { return terms_[k].value; }
    [[nodiscard]] Context context(std::uint64_t k) const { return terms_[k].context; }
    [[nodiscard]] double bell_value() const { return beta_; }
    [[nodiscard]] double local_bound() const { return ineq_.local_bound(); }
    [[nodiscard]] double per_round_bound() const { return ineq_.per_round_bound(); }
    [[nodiscard]] const std::vector<ContextValue>& terms() const { return terms_; }

    double sample_round(std::uint64_t k, Rng& rng) const {
        const Context j = terms_[k].context;
        const std::size_t cell = rng.categorical(beh_.context_probs(j));
        return ineq_.context_coefficients(j)[cell];
    }

   private:
    BellInequality ineq_;
    Behavior beh_;
    std::vector<ContextValue> terms_;
    double beta_ = 0.0;
};

/// n parallel copies of a binary two-setting inequality, measured on a product
/// behavior with one detector per party for all copies. Nothing of size 4^n is
/// materialized: context k has Alice's setting vector k >> n and Bob's k & (2^n - 1).
class ProductInstance {
   public:
    ProductInstance(const BellInequality& single_ineq, const Behavior& single_beh, int n, DetectorModel det)
        : n_(n), det_(det) {
        det_.validate();
        if (n < 1 || n > 31) throw DomainError("product instance needs 1 <= n <= 31");
        if (!(single_ineq.shape() == kBinaryTwoSetting) || !(single_beh.shape() == kBinaryTwoSetting)) {
            throw DomainError("product instance needs binary two-setting inputs");
        }
        if (det.bin_outcome > 1) throw InvalidOutcomeError("bin outcome outside the binary alphabet");
        local_bound_ = std::pow(single_ineq.local_bound(), n);
        per_round_ = std::pow(single_ineq.per_round_bound(), n);
        const std::uint32_t bin = det.bin_outcome;
        const double noise = (1.0 - det.visibility) / 4.0;
        double s_both = 0.0, s_a = 0.0, s_b = 0.0, s_none = 0.0;
        for (std::uint32_t x = 0; x < 2; ++x)
            for (std::uint32_t y = 0; y < 2; ++y) {
                Slot& slot = slots_[x * 2 + y];
                for (std::uint32_t a = 0; a < 2; ++a)
                    for (std::uint32_t b = 0; b < 2; ++b) {
                        const double p = det.visibility * single_beh(a, b, x, y) + noise;
                        slot.joint[a * 2 + b] = p;
                        slot.alice[a] += p;
                        slot.bob[b] += p;
                        slot.coeff[a * 2 + b] = single_ineq.coefficient(a, b, x, y);
                    }
                for (std::uint32_t k = 0; k < 4; ++k) slot.both += slot.coeff[k] * slot.joint[k];
                for (std::uint32_t b = 0; b < 2; ++b) slot.alice_binned += slot.coeff[bin * 2 + b] * slot.bob[b];
                for (std::uint32_t a = 0; a < 2; ++a) slot.bob_binned += slot.coeff[a * 2 + bin] * slot.alice[a];
                slot.none = slot.coeff[bin * 2 + bin];
                s_both += slot.both;
                s_a += slot.alice_binned;
                s_b += slot.bob_binned;
                s_none += slot.none;
            }
        const double eta = det_.efficiency;
        beta_ = eta * eta * std::pow(s_both, n) + eta * (1.0 - eta) * (std::pow(s_a, n) + std::pow(s_b, n)) +
                (1.0 - eta) * (1.0 - eta) * std::pow(s_none, n);
    }

    [[nodiscard]] std::uint64_t num_contexts() const { return std::uint64_t{1} << (2 * n_); }
    [[nodiscard]] double bell_value() const { return beta_; }
    [[nodiscard]] double local_bound() const { return local_bound_; }
    [[nodiscard]] double per_round_bound() const { return per_round_; }
    [[nodiscard]] int copies() const { return n_; }

    [[nodiscard]] double context_value(std::uint64_t k) const {
        double both = 1.0, a_bin = 1.0, b_bin = 1.0, none = 1.0;
        for (int i = 0; i < n_; ++i) {
            const Slot& s = slot_of(k, i);
            both *= s.both;
            a_bin *= s.alice_binned;
            b_bin *= s.bob_binned;
            none *= s.none;
        }
        const double eta = det_.efficiency;
        return eta * eta * both + eta * (1.0 - eta) * (a_bin + b_bin) + (1.0 - eta) * (1.0 - eta) * none;
    }

    /// Draws each copy independently given the round's click pattern.
    double sample_round(std::uint64_t k, Rng& rng) const {
        const bool click_a = rng.bernoulli(det_.efficiency);
        const bool click_b = rng.bernoulli(det_.efficiency);
        const std::uint32_t bin = det_.bin_outcome;
        double value = 1.0;
        for (int i = 0; i < n_; ++i) {
            const Slot& s = slot_of(k, i);
            std::uint32_t a = bin;
            std::uint32_t b = bin;
            if (click_a && click_b) {
                const auto cell = static_cast<std::uint32_t>(rng.categorical(s.joint));
                a = cell / 2;
                b = cell % 2;
            } else if (click_a) {
                a = static_cast<std::uint32_t>(rng.categorical(s.alice));
            } else if (click_b) {
                b = static_cast<std::uint32_t>(rng.categorical(s.bob));
            }
            value *= s.coeff[a * 2 + b];
        }
        return value;
    }

   private:
    struct Slot {
        std::array<double, 4> joint{};
        std::array<double, 2> alice{};
        std::array<double, 2> bob{};
        std::array<double, 4> coeff{};
        double both = 0.0;
        double alice_binned = 0.0;  // Alice reports the bin outcome, Bob clicks.
        double bob_binned = 0.0;
        double none = 0.0;
    };

    [[nodiscard]] const Slot& slot_of(std::uint64_t k, int i) const {
        const std::uint64_t x = k >> n_;
        const std::uint64_t y = k & ((std::uint64_t{1} << n_) - 1);
        return slots_[((x >> i) & 1u) * 2 + ((y >> i) & 1u)];
    }

    int n_;
    DetectorModel det_;
    std::array<Slot, 4> slots_{};
    double beta_ = 0.0;
    double local_bound_ = 0.0;
    double per_round_ = 1.0;
};

/// L context indices in [0, M): distinct (Floyd's algorithm) or i.i.d. uniform.
inline std::vector<std::uint64_t> sample_contexts(std::uint64_t num_contexts, std::uint64_t count, Draws draws,
                                                  Rng& rng) {
    if (num_contexts < 1) throw DomainError("need at least one context");
    std::vector<std::uint64_t> out;
    out.reserve(count);
    if (draws == Draws::with_replacement) {
        for (std::uint64_t l = 0; l < count; ++l) out.push_back(rng.below(num_contexts));
        return out;
    }
    if (count > num_contexts) throw DomainError("cannot draw more distinct contexts than exist");
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(count);
    for (std::uint64_t j = num_contexts - count; j < num_contexts; ++j) {
        const std::uint64_t t = rng.below(j + 1);
        const std::uint64_t pick = chosen.contains(t) ? j : t;
        chosen.insert(pick);
        out.push_back(pick);
    }
    return out;
}

/// Contexts of a graph inequality: pick the diagonal block with probability
/// |V|/M or the edge block with 2|E|/M, then uniformly inside the block.
inline std::vector<graph::GraphContext> sample_graph_contexts(const graph::ContextDistribution& dist,
                                                              std::uint64_t count, Draws draws, Rng& rng) {
    const std::uint64_t m = dist.size();
    const auto diag = static_cast<std::uint64_t>(std::llround(dist.diagonal_block_probability() * static_cast<double>(m)));
    std::vector<graph::GraphContext> out;
    out.reserve(count);
    if (draws == Draws::distinct) {
        for (std::uint64_t k : sample_contexts(m, count, draws, rng)) out.push_back(dist[k]);
        return out;
    }
    for (std::uint64_t l = 0; l < count; ++l) {
        const bool diagonal_block = diag == m || (diag > 0 && rng.bernoulli(dist.diagonal_block_probability()));
        const std::uint64_t k = diagonal_block ? rng.below(diag) : diag + rng.below(m - diag);
        out.push_back(dist[k]);
    }
    return out;
}

enum class Estimation {
    /// beta_j known exactly (infinitely many rounds per context).
    exact,
    /// beta_j estimated from K sampled rounds.
    finite_rounds,
};

struct TrialOptions {
    Estimation estimation = Estimation::exact;
    Draws draws = Draws::with_replacement;
};

struct TrialResult {
    double estimate = 0.0;
    double beta_true = 0.0;
    bool within_epsilon = false;
    bool certified = false;
    std::uint64_t contexts_used = 0;
    std::uint64_t rounds_used = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

template <BellInstance Instance>
TrialResult run_trial(const Instance& inst, const SamplingPlan& plan, TrialOptions opts, std::uint64_t seed) {
    if (plan.num_contexts != inst.num_contexts()) throw DomainError("plan was made for a different context count");
    if (plan.contexts_required < 1) throw DomainError("plan selects no contexts");
    std::uint64_t rounds = 0;
    if (opts.estimation == Estimation::finite_rounds) {
        if (!plan.rounds) throw DomainError("finite-round estimation needs a round count in the plan");
        rounds = plan.rounds->rounds;
    }
    Rng rng(seed);
    const auto chosen = sample_contexts(inst.num_contexts(), plan.contexts_required, opts.draws, rng);
    const double m = static_cast<double>(inst.num_contexts());
    double sum = 0.0;
    for (std::uint64_t k : chosen) {
        double beta_j = 0.0;
        if (rounds == 0) {
            beta_j = inst.context_value(k);
        } else {
            double acc = 0.0;
            for (std::uint64_t r = 0; r < rounds; ++r) acc += inst.sample_round(k, rng);
            beta_j = acc / static_cast<double>(rounds);
        }
        sum += m * beta_j;
    }
    TrialResult res;
    res.estimate = sum / static_cast<double>(chosen.size());
    res.beta_true = inst.bell_value();
    res.within_epsilon = std::abs(res.estimate - res.beta_true) < plan.epsilon;
    res.certified = certify(res.estimate, plan.epsilon, inst.local_bound()) == Decision::violation_certified;
    res.contexts_used = chosen.size();
    res.rounds_used = rounds * chosen.size();
    res.seed = seed;
    return res;
}

/// Runs `trials` independent trials; trial t uses stream_seed(seed, t).
template <BellInstance Instance>
std::vector<TrialResult> run_trials(const Instance& inst, const SamplingPlan& plan, TrialOptions opts,
                                    std::uint64_t seed, std::uint64_t trials, unsigned threads = 1) {
    std::vector<TrialResult> results(trials);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::uint64_t>(trials, 1))));
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t t = begin; t < end; ++t) results[t] = run_trial(inst, plan, opts, stream_seed(seed, t));
    };
    if (threads == 1) {
        work(0, trials);
        return results;
    }
    std::vector<std::jthread> pool;
    const std::uint64_t chunk = (trials + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        const std::uint64_t begin = std::min<std::uint64_t>(trials, w * chunk);
        const std::uint64_t end = std::min<std::uint64_t>(trials, begin + chunk);
        pool.emplace_back(work, begin, end);
    }
    pool.clear();  // joins
    return results;
}

struct CoverageResult {
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    std::uint64_t certified = 0;
    double failure_rate = 0.0;
    /// delta + 3 sqrt(delta / T).
    double allowed_rate = 0.0;
    [[nodiscard]] bool passed() const { return failure_rate <= allowed_rate; }
};

inline constexpr std::uint64_t kMinCoverageTrials = 1000;

/// Fraction of trials with |Y - beta| >= epsilon, against delta plus 3-sigma slack.
template <BellInstance Instance>
CoverageResult coverage_experiment(const Instance& inst, const SamplingPlan& plan, TrialOptions opts,
                                   std::uint64_t seed, std::uint64_t trials, unsigned threads = 1) {
    if (trials < kMinCoverageTrials) throw DomainError("coverage experiments need at least 1000 trials");
    CoverageResult cov;
    cov.trials = trials;
    for (const auto& r : run_trials(inst, plan, opts, seed, trials, threads)) {
        cov.failures += r.within_epsilon ? 0 : 1;
        cov.certified += r.certified ? 1 : 0;
    }
    const double t = static_cast<double>(trials);
    cov.failure_rate = static_cast<double>(cov.failures) / t;
    cov.allowed_rate = plan.delta + 3.0 * std::sqrt(plan.delta / t);
    return cov;
}

/// Sample variance of X = M * beta_j over `draws` uniform context choices.
template <BellInstance Instance>
double empirical_estimator_variance(const Instance& inst, std::uint64_t draws, Rng& rng) {
    const double m = static_cast<double>(inst.num_contexts());
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t l = 0; l < draws; ++l) {
        const double x = m * inst.context_value(rng.below(inst.num_contexts()));
        const double d = x - mean;
        mean += d / static_cast<double>(l + 1);
        m2 += d * (x - mean);
    }
    return draws > 1 ? m2 / static_cast<double>(draws - 1) : 0.0;
}

}  // namespace sbell::mc
