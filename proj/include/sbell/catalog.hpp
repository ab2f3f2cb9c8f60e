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

// Catalog of Bell inequalities and graph constants, stored as JSON.
//
// Serialization is canonical (sorted keys, shortest round-trip floats), so
// loading and re-serializing a canonical file reproduces it byte for byte.

#pragma once

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbell/bell_core.hpp"
#include "sbell/errors.hpp"
#include "sbell/graph.hpp"

namespace sbell {

inline constexpr int kCatalogFormatVersion = 1;

struct InequalityDescriptor {
    std::string name;
    /// "chsh" or "pnp-chsh".
    std::string family;
    double local_bound = 0.0;
    double algebraic_bound = 0.0;
    std::optional<double> num_contexts;
    std::string source;

    void validate() const {
        if (name.empty()) throw CatalogError("inequality entry without a name");
        if (!(local_bound <= algebraic_bound)) throw CatalogError(name + ": local bound exceeds algebraic bound");
        if (family == "chsh") {
            const auto chsh = chsh_inequality();
            if (local_bound != chsh.local_bound() || algebraic_bound != chsh.algebraic_bound() ||
                (num_contexts && *num_contexts != static_cast<double>(chsh.num_contexts()))) {
                throw CatalogError(name + ": constants disagree with CHSH");
            }
        } else if (family != "pnp-chsh") {
            throw CatalogError(name + ": unknown family '" + family + "'");
        }
    }
};

struct Catalog {
    int format_version = kCatalogFormatVersion;
    std::vector<InequalityDescriptor> inequalities;
    std::vector<graph::GraphCatalogEntry> graphs;

    void validate() const {
        if (format_version != kCatalogFormatVersion) {
            throw CatalogError("unsupported catalog format_version " + std::to_string(format_version));
        }
        std::set<std::string> names;
        for (const auto& i : inequalities) {
            i.validate();
            if (!names.insert(i.name).second) throw CatalogError("duplicate catalog name " + i.name);
        }
        for (const auto& g : graphs) {
            g.validate();
            if (!names.insert(g.name).second) throw CatalogError("duplicate catalog name " + g.name);
        }
    }

    [[nodiscard]] const graph::GraphCatalogEntry& graph(const std::string& name) const {
        for (const auto& g : graphs)
            if (g.name == name) return g;
        throw CatalogError("no graph named '" + name + "' in the catalog");
    }
};

namespace detail {

using nlohmann::json;

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <class T>
std::optional<T> get_optional(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return j.at(key).get<T>();
}

inline json to_json(const InequalityDescriptor& d) {
    json j = {{"name", d.name},
              {"family", d.family},
              {"local_bound", d.local_bound},
              {"algebraic_bound", d.algebraic_bound},
              {"source", d.source}};
    put_optional(j, "num_contexts", d.num_contexts);
    return j;
}

inline json to_json(const graph::GraphCatalogEntry& g) {
    json rows = json::array();
    for (const auto& r : g.rows) rows.push_back(json::array({r.eta, r.nu}));
    json j = {{"name", g.name},           {"dimension", g.dimension}, {"total_contexts", g.total_contexts},
              {"eta_crit", g.eta_crit},   {"rows", rows},             {"source", g.source}};
    put_optional(j, "vertices", g.vertices);
    put_optional(j, "edges", g.edges);
    put_optional(j, "independence_number", g.independence_number);
    put_optional(j, "quantum_value", g.quantum_value);
    return j;
}

inline InequalityDescriptor inequality_from_json(const json& j) {
    InequalityDescriptor d;
    d.name = j.at("name").get<std::string>();
    d.family = j.at("family").get<std::string>();
    d.local_bound = j.at("local_bound").get<double>();
    d.algebraic_bound = j.at("algebraic_bound").get<double>();
    d.num_contexts = get_optional<double>(j, "num_contexts");
    d.source = j.value("source", "");
    return d;
}

inline graph::GraphCatalogEntry graph_from_json(const json& j) {
    graph::GraphCatalogEntry g;
    g.name = j.at("name").get<std::string>();
    g.dimension = j.at("dimension").get<int>();
    g.total_contexts = j.at("total_contexts").get<double>();
    g.eta_crit = j.at("eta_crit").get<double>();
    for (const auto& r : j.at("rows")) {
        if (!r.is_array() || r.size() != 2) throw CatalogError(g.name + ": rows must be [eta, nu] pairs");
        g.rows.push_back({r[0].get<double>(), r[1].get<double>()});
    }
    g.vertices = get_optional<double>(j, "vertices");
    g.edges = get_optional<double>(j, "edges");
    g.independence_number = get_optional<double>(j, "independence_number");
    g.quantum_value = get_optional<double>(j, "quantum_value");
    g.source = j.value("source", "");
    return g;
}

}  // namespace detail

inline std::string serialize_catalog(const Catalog& cat) {
    detail::json j;
    j["format_version"] = cat.format_version;
    j["inequalities"] = detail::json::array();
    for (const auto& i : cat.inequalities) j["inequalities"].push_back(detail::to_json(i));
    j["graphs"] = detail::json::array();
    for (const auto& g : cat.graphs) j["graphs"].push_back(detail::to_json(g));
    return j.dump(2) + "\n";
}

/// Parses and validates a catalog. Any structural or invariant failure raises CatalogError.
inline Catalog parse_catalog(const std::string& text) {
    Catalog cat;
    try {
        const auto j = detail::json::parse(text);
        cat.format_version = j.at("format_version").get<int>();
        for (const auto& i : j.at("inequalities")) cat.inequalities.push_back(detail::inequality_from_json(i));
        for (const auto& g : j.at("graphs")) cat.graphs.push_back(detail::graph_from_json(g));
    } catch (const detail::json::exception& e) {
        throw CatalogError(std::string("malformed catalog: ") + e.what());
    }
    cat.validate();
    return cat;
}

inline Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError("cannot open catalog " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_catalog(buf.str());
}

/// Built-in catalog. Graph rows are tabulated at V = 1, delta = 3e-5.
inline Catalog default_catalog() {
    const std::string table = "published table, V = 1, delta = 3e-5";
    Catalog cat;
    cat.inequalities.push_back({"CHSH", "chsh", 3.0, 4.0, 4.0, "CHSH in probability form"});
    cat.inequalities.push_back({"PNP-CHSH", "pnp-chsh", 3.0, 4.0, std::nullopt,
                                "n parallel CHSH copies; M = 4^n, local bound 3^n"});
    auto add = [&](std::string name, int d, double m, double eta_crit, std::vector<graph::CatalogRow> rows) {
        graph::GraphCatalogEntry e;
        e.name = std::move(name);
        e.dimension = d;
        e.total_contexts = m;
        e.eta_crit = eta_crit;
        e.rows = std::move(rows);
        e.source = table;
        cat.graphs.push_back(std::move(e));
    };
    add("Y44", 44, 4.62e24, 0.163,
        {{0.200, 7.01e-19}, {0.400, 7.01e-21}, {0.600, 1.12e-21}, {0.800, 3.31e-22}, {0.950, 1.62e-22}});
    add("Y36", 36, 7.79e19, 0.260, {{0.400, 7.07e-16}, {0.600, 7.06e-17}, {0.800, 1.84e-17}, {0.950, 8.66e-18}});
    add("Y32", 32, 3.22e17, 0.326, {{0.400, 4.51e-13}, {0.600, 2.03e-14}, {0.800, 4.54e-15}, {0.950, 2.02e-15}});
    add("Y28", 28, 1.34e15, 0.407, {{0.600, 7.19e-12}, {0.800, 1.20e-12}, {0.950, 4.99e-13}});
    add("P4R", 16, 8752320.0, 0.516, {{0.600, 3.84e-4}, {0.800, 2.40e-4}, {0.950, 8.29e-5}});
    add("P3C", 8, 341280.0, 0.730, {{0.750, 0.098}, {0.850, 0.002}, {0.950, 6.17e-4}});
    add("P3R", 8, 25440.0, 0.730, {{0.850, 0.072}, {0.950, 0.019}});
    add("P2C", 4, 960.0, 0.894, {{0.950, 0.668}});
    add("P2R", 4, 240.0, 0.912, {});
    return cat;
}

}  // namespace sbell
