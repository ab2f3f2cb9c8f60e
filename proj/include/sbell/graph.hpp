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

// Graph-theoretic Bell inequalities
//
//     beta_G = sum_i p(i,i) - 1/(2 Xi) sum_{(i,j) in E} [p(i,j) + p(j,i)] <= C
//
// over an orthogonality graph G. p(i,j) is the probability that Alice's
// projector i and Bob's projector j both fire. Contexts are the |V| diagonal
// pairs plus both orientations of every edge: M = |V| + 2|E|.
//
// Graphs are either explicit (edge list, small enough for structural work) or
// catalog-only (vertex and edge counts plus constants).

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbell/errors.hpp"

namespace sbell::graph {

/// Largest vertex count accepted by the exact independence-number search.
inline constexpr std::uint32_t kMaxSearchVertices = 64;

struct Edge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    friend constexpr bool operator==(const Edge&, const Edge&) = default;
    friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Optional graph constants. C is the independence number and Q = |V|/xi the quantum value.
struct GraphConstants {
    double xi_number = 1.0;
    std::optional<double> independence_number;
    std::optional<double> quantum_value;
    std::optional<int> dimension;
};

class OrthogonalityGraph {
   public:
    /// Explicit graph. Edges are normalized to u < v and deduplicated.
    OrthogonalityGraph(std::uint32_t num_vertices, std::vector<Edge> edges, GraphConstants constants = {})
        : num_vertices_(num_vertices), constants_(std::move(constants)) {
        for (auto& e : edges) {
            if (e.u == e.v) throw DomainError("self-loop on vertex " + std::to_string(e.u));
            if (e.u >= num_vertices || e.v >= num_vertices) throw DomainError("edge endpoint out of range");
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        edges_ = std::move(edges);
        vertex_count_ = num_vertices;
        edge_count_ = static_cast<double>(edges_->size());
        validate_constants();
    }

    /// Catalog-only graph known through its counts; structural operations refuse it.
    static OrthogonalityGraph from_counts(double vertices, double edges, GraphConstants constants) {
        if (!(vertices >= 1.0) || !(edges >= 0.0)) throw DomainError("graph counts must be positive");
        OrthogonalityGraph g;
        g.vertex_count_ = vertices;
        g.edge_count_ = edges;
        g.constants_ = std::move(constants);
        g.validate_constants();
        return g;
    }

    [[nodiscard]] bool explicit_structure() const { return edges_.has_value(); }
    [[nodiscard]] double vertex_count() const { return vertex_count_; }
    [[nodiscard]] double edge_count() const { return edge_count_; }
    /// M = |V| + 2|E|.
    [[nodiscard]] double total_contexts() const { return vertex_count_ + 2.0 * edge_count_; }
    [[nodiscard]] const GraphConstants& constants() const { return constants_; }
    [[nodiscard]] double xi_number() const { return constants_.xi_number; }

    [[nodiscard]] std::uint32_t num_vertices() const {
        require_explicit();
        return num_vertices_;
    }
    [[nodiscard]] const std::vector<Edge>& edges() const {
        require_explicit();
        return *edges_;
    }
    [[nodiscard]] bool adjacent(std::uint32_t u, std::uint32_t v) const {
        if (u > v) std::swap(u, v);
        return std::binary_search(edges().begin(), edges().end(), Edge{u, v});
    }

   private:
    OrthogonalityGraph() = default;

    void require_explicit() const {
        if (!edges_) throw TooLargeError("graph is known only through catalog constants");
    }

    void validate_constants() const {
        if (!(constants_.xi_number > 0.0)) throw DomainError("xi number must be positive");
        if (constants_.independence_number) {
            const double c = *constants_.independence_number;
            if (!(c >= 1.0 && c <= vertex_count_)) throw DomainError("independence number outside [1, |V|]");
        }
        if (constants_.quantum_value && !(*constants_.quantum_value > 0.0)) {
            throw DomainError("quantum value must be positive");
        }
    }

    std::uint32_t num_vertices_ = 0;
    std::optional<std::vector<Edge>> edges_;
    double vertex_count_ = 0.0;
    double edge_count_ = 0.0;
    GraphConstants constants_;
};

inline OrthogonalityGraph cycle_graph(std::uint32_t n) {
    std::vector<Edge> e;
    for (std::uint32_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return OrthogonalityGraph(n, std::move(e));
}

inline OrthogonalityGraph complete_graph(std::uint32_t n) {
    std::vector<Edge> e;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) e.push_back({i, j});
    return OrthogonalityGraph(n, std::move(e));
}

/// Joint firing probabilities p(i,j) for the diagonal and both edge orientations.
class GraphProbabilities {
   public:
    void set(std::uint32_t i, std::uint32_t j, double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability outside [0,1]");
        probs_[{i, j}] = p;
    }
    [[nodiscard]] double at(std::uint32_t i, std::uint32_t j) const {
        auto it = probs_.find({i, j});
        if (it == probs_.end()) {
            throw MissingProbabilityError("no probability for (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
        return it->second;
    }

   private:
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> probs_;
};

inline double graph_bell_value(const OrthogonalityGraph& g, const GraphProbabilities& p) {
    double diag = 0.0;
    for (std::uint32_t i = 0; i < g.num_vertices(); ++i) diag += p.at(i, i);
    double cross = 0.0;
    for (const Edge& e : g.edges()) cross += p.at(e.u, e.v) + p.at(e.v, e.u);
    return diag - cross / (2.0 * g.xi_number());
}

/// Exact independence number by branch and bound: maximum clique search on the
/// complement with greedy coloring bounds. Deterministic.
inline int independence_number(const OrthogonalityGraph& g) {
    const std::uint32_t n = g.num_vertices();
    if (n > kMaxSearchVertices) throw TooLargeError("exact search is limited to 64 vertices");
    if (n == 0) return 0;
    using Set = std::uint64_t;
    const Set all = n == 64 ? ~Set{0} : ((Set{1} << n) - 1);
    // Complement adjacency: non-adjacent distinct vertices.
    std::vector<Set> comp(n, all);
    for (std::uint32_t v = 0; v < n; ++v) comp[v] &= ~(Set{1} << v);
    for (const Edge& e : g.edges()) {
        comp[e.u] &= ~(Set{1} << e.v);
        comp[e.v] &= ~(Set{1} << e.u);
    }

    int best = 0;
    // Orders candidates by greedy color class and returns (vertex, color) pairs;
    // color bounds the clique size reachable from that vertex onward.
    auto color_order = [&](Set cand, std::vector<std::pair<int, int>>& out) {
        out.clear();
        int color = 0;
        while (cand) {
            ++color;
            Set q = cand;
            while (q) {
                const int v = std::countr_zero(q);
                q &= ~(Set{1} << v);
                q &= ~comp[v];
                cand &= ~(Set{1} << v);
                out.emplace_back(v, color);
            }
        }
    };

    auto expand = [&](auto&& self, Set cand, int size) -> void {
        std::vector<std::pair<int, int>> order;
        color_order(cand, order);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto [v, color] = *it;
            if (size + color <= best) return;
            const Set next = cand & comp[v];
            if (next == 0) {
                best = std::max(best, size + 1);
            } else {
                self(self, next, size + 1);
            }
            cand &= ~(Set{1} << v);
        }
    };
    expand(expand, all, 0);
    return best;
}

struct GraphContext {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    friend constexpr bool operator==(const GraphContext&, const GraphContext&) = default;
    [[nodiscard]] bool diagonal() const { return i == j; }
};

/// Context distribution: choose the diagonal block with weight |V|/M or the edge
/// block with weight 2|E|/M, then uniformly inside the block. Every context has
/// probability 1/M; non-edge off-diagonal pairs have probability 0.
class ContextDistribution {
   public:
    explicit ContextDistribution(OrthogonalityGraph g) : g_(std::move(g)) {
        const auto& g_ref = g_;
        const auto n = g_ref.num_vertices();
        contexts_.reserve(n + 2 * g_ref.edges().size());
        for (std::uint32_t i = 0; i < n; ++i) contexts_.push_back({i, i});
        for (const Edge& e : g_ref.edges()) {
            contexts_.push_back({e.u, e.v});
            contexts_.push_back({e.v, e.u});
        }
    }

    [[nodiscard]] std::size_t size() const { return contexts_.size(); }
    [[nodiscard]] const std::vector<GraphContext>& contexts() const { return contexts_; }
    [[nodiscard]] const GraphContext& operator[](std::size_t k) const { return contexts_[k]; }

    [[nodiscard]] double diagonal_block_probability() const {
        return static_cast<double>(g_.num_vertices()) / static_cast<double>(size());
    }
    [[nodiscard]] double edge_block_probability() const {
        return 2.0 * static_cast<double>(g_.edges().size()) / static_cast<double>(size());
    }
    [[nodiscard]] double probability(std::uint32_t i, std::uint32_t j) const {
        if (i >= g_.num_vertices() || j >= g_.num_vertices()) return 0.0;
        if (i == j || g_.adjacent(i, j)) return 1.0 / static_cast<double>(size());
        return 0.0;
    }

   private:
    OrthogonalityGraph g_;
    std::vector<GraphContext> contexts_;
};

inline ContextDistribution context_distribution(const OrthogonalityGraph& g) { return ContextDistribution(g); }

/// Unbiased single-context estimator under the uniform 1/M context choice:
/// M * beta for diagonal contexts, -M / (2 Xi) * beta for oriented edges.
inline double graph_estimator(const OrthogonalityGraph& g, std::uint32_t i, std::uint32_t j, double beta_ij) {
    if (!(beta_ij >= 0.0 && beta_ij <= 1.0)) throw DomainError("context value must lie in [0,1]");
    if (i >= g.num_vertices() || j >= g.num_vertices()) throw InvalidContextError("vertex out of range");
    const double m = g.total_contexts();
    if (i == j) return m * beta_ij;
    if (!g.adjacent(i, j)) throw InvalidContextError("(i,j) is neither diagonal nor an edge");
    return -m / (2.0 * g.xi_number()) * beta_ij;
}

/// Hoeffding context count L = -ln(delta) (|V| + 2|E|)^4 / (8 eps^2 |E|^2 |V|^2).
inline double hoeffding_contexts_real(const OrthogonalityGraph& g, double epsilon, double delta) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(g.edge_count() > 0.0)) throw DegenerateGraphError("graph has no edges");
    const double v = g.vertex_count();
    const double e = g.edge_count();
    const double m = g.total_contexts();
    return -std::log(delta) * std::pow(m, 4) / (8.0 * epsilon * epsilon * e * e * v * v);
}

inline std::uint64_t hoeffding_contexts(const OrthogonalityGraph& g, double epsilon, double delta) {
    const double raw = hoeffding_contexts_real(g, epsilon, delta);
    const double r = std::round(raw);
    const double l = std::abs(raw - r) <= 1e-12 * std::max(1.0, raw) ? r : std::ceil(raw);
    if (!(l < 18446744073709549568.0)) throw DomainError("context count overflows a 64-bit count");
    return static_cast<std::uint64_t>(l);
}

/// eta_nu = sqrt( (1/Q) sqrt(-ln(delta) M^3 / (2 nu |V|^2 |E|^2)) + C/Q ).
inline double graph_min_efficiency(const OrthogonalityGraph& g, double nu, double delta) {
    const auto& k = g.constants();
    if (!k.independence_number || !k.quantum_value) throw DomainError("C and Q are required");
    if (!(nu > 0.0 && nu <= 1.0)) throw DomainError("fraction must lie in (0,1]");
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0,1]");
    if (!(g.edge_count() > 0.0)) throw DegenerateGraphError("graph has no edges");
    const double c = *k.independence_number;
    const double q = *k.quantum_value;
    const double v = g.vertex_count();
    const double e = g.edge_count();
    const double stat = std::sqrt(-std::log(delta) * std::pow(g.total_contexts(), 3) / (2.0 * nu * v * v * e * e));
    const double eta = std::sqrt(stat / q + c / q);
    if (!(eta <= 1.0)) throw InfeasibleError("required efficiency exceeds 1");
    return eta;
}

/// Inverse of graph_min_efficiency: the fraction needed at efficiency eta,
/// nu = -ln(delta) M^3 / (2 |V|^2 |E|^2 (Q eta^2 - C)^2).
inline double graph_fraction_required(const OrthogonalityGraph& g, double eta, double delta) {
    const auto& k = g.constants();
    if (!k.independence_number || !k.quantum_value) throw DomainError("C and Q are required");
    if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("efficiency must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(g.edge_count() > 0.0)) throw DegenerateGraphError("graph has no edges");
    const double gap = *k.quantum_value * eta * eta - *k.independence_number;
    if (!(gap > 0.0)) throw NoViolationError("efficiency at or below the critical value");
    const double v = g.vertex_count();
    const double e = g.edge_count();
    return -std::log(delta) * std::pow(g.total_contexts(), 3) / (2.0 * v * v * e * e * gap * gap);
}

struct CatalogRow {
    double eta = 0.0;
    double nu = 0.0;
};

/// One graph inequality as tabulated: critical efficiency and (eta, nu) rows.
struct GraphCatalogEntry {
    std::string name;
    int dimension = 0;
    double total_contexts = 0.0;
    double eta_crit = 0.0;
    std::vector<CatalogRow> rows;
    std::optional<double> vertices;
    std::optional<double> edges;
    std::optional<double> independence_number;
    std::optional<double> quantum_value;
    std::string source;

    void validate() const {
        if (name.empty()) throw CatalogError("graph entry without a name");
        if (!(eta_crit > 0.0 && eta_crit <= 1.0)) throw CatalogError(name + ": eta_crit outside (0,1]");
        if (!(total_contexts >= 1.0)) throw CatalogError(name + ": total contexts must be positive");
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto& r = rows[k];
            if (!(r.eta > 0.0 && r.eta <= 1.0 && r.nu > 0.0)) throw CatalogError(name + ": row out of range");
            if (k > 0 && !(r.eta > rows[k - 1].eta && r.nu < rows[k - 1].nu)) {
                throw CatalogError(name + ": rows must have eta ascending and nu descending");
            }
        }
        if (vertices && edges && std::abs(*vertices + 2.0 * *edges - total_contexts) > 1e-9 * total_contexts) {
            throw CatalogError(name + ": M differs from |V| + 2|E|");
        }
        if (independence_number && quantum_value && !(*independence_number < *quantum_value)) {
            throw CatalogError(name + ": C must be below Q");
        }
    }

    /// Explicit counts and constants, when the entry carries them all.
    [[nodiscard]] std::optional<OrthogonalityGraph> as_graph() const {
        if (!vertices || !edges || !independence_number || !quantum_value) return std::nullopt;
        GraphConstants k;
        k.independence_number = independence_number;
        k.quantum_value = quantum_value;
        k.dimension = dimension;
        return OrthogonalityGraph::from_counts(*vertices, *edges, k);
    }
};

/// Parameters of eta^2 = sqrt(G / nu) + C/Q.
struct Calibration {
    double c_over_q = 0.0;
    double stat_const = 0.0;

    [[nodiscard]] double predict_nu(double eta) const {
        const double gap = eta * eta - c_over_q;
        if (!(gap > 0.0)) throw InfeasibleError("efficiency at or below the critical value");
        return stat_const / (gap * gap);
    }
    [[nodiscard]] double predict_eta(double nu) const {
        if (!(nu > 0.0)) throw DomainError("fraction must be positive");
        return std::sqrt(std::sqrt(stat_const / nu) + c_over_q);
    }
};

/// Largest relative deviation of a calibrated prediction from a printed row.
inline constexpr double kCalibrationTolerance = 0.10;

/// Fits C/Q = eta_crit^2 and G from the first row, without checking the others.
inline Calibration fit_first_row(const GraphCatalogEntry& entry) {
    if (entry.rows.empty()) throw DomainError(entry.name + ": no (eta, nu) rows to calibrate from");
    Calibration cal;
    cal.c_over_q = entry.eta_crit * entry.eta_crit;
    const auto& r = entry.rows.front();
    const double gap = r.eta * r.eta - cal.c_over_q;
    if (!(gap > 0.0)) throw DomainError(entry.name + ": first row is not above the critical efficiency");
    cal.stat_const = r.nu * gap * gap;
    return cal;
}

inline double relative_error(double predicted, double printed) { return std::abs(predicted - printed) / printed; }

/// Calibrates from the first row and requires every other row to agree within 10%.
inline Calibration calibrate_from_rows(const GraphCatalogEntry& entry) {
    const Calibration cal = fit_first_row(entry);
    for (std::size_t k = 1; k < entry.rows.size(); ++k) {
        const auto& r = entry.rows[k];
        const double err = relative_error(cal.predict_nu(r.eta), r.nu);
        if (err > kCalibrationTolerance) {
            throw InconsistentRowsError(entry.name + ": row eta=" + std::to_string(r.eta) + " deviates by " +
                                        std::to_string(100.0 * err) + "%");
        }
    }
    return cal;
}

}  // namespace sbell::graph
