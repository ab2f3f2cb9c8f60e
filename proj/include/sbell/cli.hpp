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

// Command-line front end. parse_command validates argv into a Command;
// run_command executes it and writes CSV with a '#' metadata block.
//
// Exit statuses: 0 success, 1 usage, 2 infeasible or no violation,
// 3 I/O or catalog failure.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "sbell/bell_core.hpp"
#include "sbell/catalog.hpp"
#include "sbell/errors.hpp"
#include "sbell/graph.hpp"
#include "sbell/montecarlo.hpp"
#include "sbell/planner.hpp"
#include "sbell/pnp.hpp"

namespace sbell::cli {

inline constexpr const char* kToolName = "sbell";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitStatus : int { kOk = 0, kUsage = 1, kInfeasible = 2, kIoError = 3 };

struct GlobalOptions {
    std::optional<std::string> catalog;
    std::optional<std::string> out;
    int precision = 6;
    unsigned threads = 1;
};

struct DesignArgs {
    std::string family = "pnp";
    int n = 1;
    std::string graph;
    double eta = 1.0;
    double visibility = 1.0;
    double delta = 3e-5;
    double penalty = 0.0;
    double safety = 1.0;
};

struct PnpTableArgs {
    std::vector<int> n{14, 13, 12, 11, 10};
    std::vector<double> etas{0.40, 0.60, 0.80, 0.95};
    double visibility = 1.0;
    double delta = 3e-5;
};

struct PnpCurveArgs {
    std::vector<int> n{10, 11, 12, 13, 14};
    double visibility = 1.0;
    double delta = 3e-5;
    double nu_min = 1e-3;
    int points = 31;
};

struct GraphNuArgs {
    std::string graph;
    double eta = 1.0;
    double delta = 3e-5;
};

struct GraphTableArgs {
    std::vector<std::string> graphs;
    double delta = 3e-5;
};

struct SimulateArgs {
    std::string instance;
    int n = 3;
    double visibility = 1.0;
    double efficiency = 1.0;
    double epsilon = 0.3;
    double delta = 0.05;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    std::string estimation = "exact";
    std::string draws = "with";
    std::optional<std::uint64_t> contexts;
    double epsilon_prime = 0.01;
    double delta_prime = 3e-5;
};

struct ValidateCatalogArgs {};

using Params =
    std::variant<DesignArgs, PnpTableArgs, PnpCurveArgs, GraphNuArgs, GraphTableArgs, SimulateArgs, ValidateCatalogArgs>;

struct Command {
    std::string verb;
    GlobalOptions global;
    Params params;
};

struct ParseResult {
    std::optional<Command> command;
    int status = kOk;
    std::string message;
};

/// Fixed-width %g formatting used for every emitted number.
inline std::string format_number(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

inline ParseResult parse_command(const std::vector<std::string>& argv) {
    CLI::App app{"Plan and simulate Bell tests that evaluate a random subset of contexts", kToolName};
    app.require_subcommand(1);
    app.allow_extras(false);

    GlobalOptions global;
    auto add_global = [&](CLI::App* sub) {
        sub->add_option("--catalog", global.catalog, "Catalog JSON file (default: built-in)");
        sub->add_option("--out", global.out, "Write output to this file instead of stdout");
        sub->add_option("--precision", global.precision, "Significant digits of emitted numbers")
            ->check(CLI::Range(1, 17));
        sub->add_option("--threads", global.threads, "Worker threads for simulations")->check(CLI::Range(1u, 256u));
    };
    auto probability = CLI::Range(0.0, 1.0);
    auto open_unit = [](const std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return (v > 0.0 && v < 1.0) ? "" : "value must lie in (0,1)";
    };
    auto positive = [](const std::string& s) -> std::string {
        double v = 0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return v > 0.0 ? "" : "value must be positive";
    };

    DesignArgs design;
    auto* d = app.add_subcommand("design", "Fraction of contexts needed for a given efficiency");
    d->add_option("--family", design.family, "pnp or graph")->check(CLI::IsMember({"pnp", "graph"}));
    d->add_option("--n", design.n, "PNP copies")->check(CLI::Range(1, pnp::kMaxCopies));
    d->add_option("--graph", design.graph, "Catalog graph name (family graph)");
    d->add_option("--eta", design.eta, "Detection efficiency")->required()->check(probability);
    d->add_option("--visibility", design.visibility, "Visibility")->check(probability);
    d->add_option("--delta", design.delta, "Failure probability")->check(open_unit);
    d->add_option("--penalty", design.penalty, "Marginal penalty sum A + B")->check(CLI::NonNegativeNumber);
    d->add_option("--safety", design.safety, "Factor applied to the margin epsilon")->check(CLI::Range(1e-12, 1.0));
    add_global(d);

    PnpTableArgs table;
    auto* t = app.add_subcommand("pnp-table", "Fractions for PNP-CHSH at several efficiencies");
    t->add_option("--n", table.n, "PNP copies")->check(CLI::Range(1, pnp::kMaxCopies))->delimiter(',');
    t->add_option("--eta", table.etas, "Efficiencies")->check(probability)->delimiter(',');
    t->add_option("--visibility", table.visibility, "Visibility")->check(probability);
    t->add_option("--delta", table.delta, "Failure probability")->check(open_unit);
    add_global(t);

    PnpCurveArgs curve;
    auto* c = app.add_subcommand("pnp-curve", "Minimum efficiency as a function of the context fraction");
    c->add_option("--n", curve.n, "PNP copies")->check(CLI::Range(1, pnp::kMaxCopies))->delimiter(',');
    c->add_option("--visibility", curve.visibility, "Visibility")->check(probability);
    c->add_option("--delta", curve.delta, "Failure probability")->check(open_unit);
    c->add_option("--nu-min", curve.nu_min, "Smallest fraction on the grid")->check(open_unit);
    c->add_option("--points", curve.points, "Grid points between nu-min and 1")->check(CLI::Range(2, 100000));
    add_global(c);

    GraphNuArgs gnu;
    auto* g = app.add_subcommand("graph-nu", "Fraction needed for a catalog graph at a given efficiency");
    g->add_option("graph", gnu.graph, "Catalog graph name")->required();
    g->add_option("--eta", gnu.eta, "Detection efficiency")->required()->check(probability);
    g->add_option("--delta", gnu.delta, "Failure probability")->check(open_unit);
    add_global(g);

    GraphTableArgs gtable;
    auto* gt = app.add_subcommand("graph-table", "Tabulated and calibrated rows of catalog graphs");
    gt->add_option("--graph", gtable.graphs, "Restrict to these graphs")->delimiter(',');
    gt->add_option("--delta", gtable.delta, "Failure probability for computed rows")->check(open_unit);
    add_global(gt);

    SimulateArgs sim;
    std::optional<std::uint64_t> seed;
    auto* s = app.add_subcommand("simulate", "Seeded Monte Carlo trials of a subset test");
    s->add_option("instance", sim.instance, "chsh or pnp")->required()->check(CLI::IsMember({"chsh", "pnp"}));
    s->add_option("--n", sim.n, "PNP copies")->check(CLI::Range(1, 31));
    s->add_option("--visibility", sim.visibility, "Visibility")->check(probability);
    s->add_option("--eta", sim.efficiency, "Detection efficiency")->check(probability);
    s->add_option("--epsilon", sim.epsilon, "Estimation error")->check(positive);
    s->add_option("--delta", sim.delta, "Failure probability")->check(open_unit);
    s->add_option("--trials", sim.trials, "Number of trials")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{100000000}));
    s->add_option("--seed", seed, "Master seed (required)")->required();
    s->add_option("--estimation", sim.estimation, "exact or finite")->check(CLI::IsMember({"exact", "finite"}));
    s->add_option("--draws", sim.draws, "with or without replacement")->check(CLI::IsMember({"with", "without"}));
    s->add_option("--contexts", sim.contexts, "Override the planned context count L")
        ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 62));
    s->add_option("--eps-prime", sim.epsilon_prime, "Per-context error for finite rounds")->check(positive);
    s->add_option("--delta-prime", sim.delta_prime, "Per-context failure probability")->check(open_unit);
    add_global(s);

    auto* v = app.add_subcommand("validate-catalog", "Load, validate and round-trip a catalog");
    add_global(v);

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        return {std::nullopt, kOk, app.help()};
    } catch (const CLI::CallForAllHelp&) {
        return {std::nullopt, kOk, app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        return {std::nullopt, kUsage, e.what()};
    }

    Command cmd;
    cmd.global = global;
    if (d->parsed()) {
        if (design.family == "graph" && design.graph.empty()) return {std::nullopt, kUsage, "design --family graph needs --graph"};
        cmd.verb = "design";
        cmd.params = design;
    } else if (t->parsed()) {
        cmd.verb = "pnp-table";
        cmd.params = table;
    } else if (c->parsed()) {
        cmd.verb = "pnp-curve";
        cmd.params = curve;
    } else if (g->parsed()) {
        cmd.verb = "graph-nu";
        cmd.params = gnu;
    } else if (gt->parsed()) {
        cmd.verb = "graph-table";
        cmd.params = gtable;
    } else if (s->parsed()) {
        sim.seed = *seed;
        cmd.verb = "simulate";
        cmd.params = sim;
    } else {
        cmd.verb = "validate-catalog";
        cmd.params = ValidateCatalogArgs{};
    }
    return {cmd, kOk, ""};
}

namespace detail {

class CsvWriter {
   public:
    CsvWriter(std::ostream& out, int precision) : out_(out), precision_(precision) {}

    void meta(const std::string& key, const std::string& value) { out_ << "# " << key << ": " << value << '\n'; }
    void meta(const std::string& key, double value) { meta(key, num(value)); }

    void header(std::initializer_list<const char*> cols) {
        bool first = true;
        for (const char* col : cols) {
            out_ << (first ? "" : ",") << col;
            first = false;
        }
        out_ << '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    [[nodiscard]] std::string num(double v) const { return format_number(v, precision_); }

   private:
    std::string cell(double v) const { return num(v); }
    std::string cell(int v) const { return std::to_string(v); }
    std::string cell(std::uint64_t v) const { return std::to_string(v); }
    std::string cell(bool v) const { return v ? "true" : "false"; }
    std::string cell(const std::string& v) const { return v; }
    std::string cell(const char* v) const { return v; }

    std::ostream& out_;
    int precision_;
};

inline void preamble(CsvWriter& w, const std::string& verb) {
    w.meta("tool", std::string(kToolName) + " " + kToolVersion);
    w.meta("command", verb);
}

inline void estimator_note(CsvWriter& w) {
    w.meta("estimator", std::string("closed forms take the estimator range without the 1/(2 Xi) edge weight; "
                                    "the simulator weights edge contexts by -M/(2 Xi) to stay unbiased"));
}

inline int run_design(const DesignArgs& a, const Catalog& cat, CsvWriter& w, std::ostream& err) {
    preamble(w, "design");
    w.meta("family", a.family);
    w.meta("eta", a.eta);
    w.meta("visibility", a.visibility);
    w.meta("delta", a.delta);
    double nu = 0.0;
    std::string instance;
    std::string source = "computed";
    if (a.family == "pnp") {
        instance = "n=" + std::to_string(a.n);
        w.meta("penalty", a.penalty);
        w.meta("safety", a.safety);
        try {
            nu = pnp::fraction_required(a.n, a.eta, a.visibility, a.delta, a.penalty, {.safety = a.safety});
        } catch (const NoViolationError&) {
            err << "no violation: the binned value does not exceed 3^n\n";
            return kInfeasible;
        }
    } else {
        const auto& entry = cat.graph(a.graph);
        instance = entry.name;
        if (a.visibility != 1.0) err << "note: graph rows are tabulated at visibility 1\n";
        try {
            if (auto g = entry.as_graph()) {
                nu = graph::graph_fraction_required(*g, a.eta, a.delta);
            } else {
                nu = graph::fit_first_row(entry).predict_nu(a.eta);
                source = "calibrated";
            }
        } catch (const Error& e) {
            err << "infeasible: " << e.what() << '\n';
            return kInfeasible;
        }
    }
    const bool feasible = nu <= 1.0;
    w.header({"family", "instance", "eta", "visibility", "delta", "nu", "feasible", "source"});
    w.row(a.family, instance, a.eta, a.visibility, a.delta, nu, feasible, source);
    return feasible ? kOk : kInfeasible;
}

inline int run_pnp_table(const PnpTableArgs& a, CsvWriter& w) {
    preamble(w, "pnp-table");
    w.meta("visibility", a.visibility);
    w.meta("delta", a.delta);
    w.meta("rows", std::string("critical efficiency (nu = 1) followed by every efficiency with nu <= 1"));
    w.header({"n", "eta", "nu"});
    for (int n : a.n) {
        double crit = 0.0;
        try {
            crit = pnp::critical_efficiency(n, a.visibility);
        } catch (const NoViolationError&) {
            continue;
        }
        w.row(n, crit, 1.0);
        for (double eta : a.etas) {
            if (eta <= crit) continue;
            const double nu = pnp::fraction_required(n, eta, a.visibility, a.delta);
            if (nu <= 1.0) w.row(n, eta, nu);
        }
    }
    return kOk;
}

inline int run_pnp_curve(const PnpCurveArgs& a, CsvWriter& w) {
    preamble(w, "pnp-curve");
    w.meta("visibility", a.visibility);
    w.meta("delta", a.delta);
    w.meta("grid", "log-spaced nu in [" + w.num(a.nu_min) + ", 1], " + std::to_string(a.points) + " points");
    w.header({"n", "nu", "eta_nu"});
    const double lo = std::log(a.nu_min);
    for (int n : a.n) {
        for (int k = 0; k < a.points; ++k) {
            const double nu = k + 1 == a.points ? 1.0 : std::exp(lo * (1.0 - static_cast<double>(k) / (a.points - 1)));
            try {
                w.row(n, nu, pnp::min_efficiency(n, nu, a.visibility, a.delta));
            } catch (const InfeasibleError&) {
            }
        }
    }
    return kOk;
}

inline int run_graph_nu(const GraphNuArgs& a, const Catalog& cat, CsvWriter& w, std::ostream& err) {
    const auto& entry = cat.graph(a.graph);
    preamble(w, "graph-nu");
    w.meta("graph", entry.name);
    w.meta("delta", a.delta);
    estimator_note(w);
    double nu = 0.0;
    std::string source = "computed";
    try {
        if (auto g = entry.as_graph()) {
            nu = graph::graph_fraction_required(*g, a.eta, a.delta);
        } else {
            w.meta("calibration", std::string("eta^2 = sqrt(G / nu) + C/Q fitted to eta_crit and the first row"));
            nu = graph::fit_first_row(entry).predict_nu(a.eta);
            source = "calibrated";
        }
    } catch (const Error& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    }
    w.header({"name", "eta", "nu", "source"});
    w.row(entry.name, a.eta, nu, source);
    return nu <= 1.0 ? kOk : kInfeasible;
}

inline int run_graph_table(const GraphTableArgs& a, const Catalog& cat, CsvWriter& w) {
    preamble(w, "graph-table");
    w.meta("delta", a.delta);
    estimator_note(w);
    w.meta("sources", std::string("paper = tabulated catalog value; calibrated = fitted to eta_crit and the first row; "
                                  "computed = closed form from |V|, |E|, C, Q"));
    w.header({"name", "d", "M", "eta", "nu", "source"});
    for (const auto& e : cat.graphs) {
        if (!a.graphs.empty() && std::find(a.graphs.begin(), a.graphs.end(), e.name) == a.graphs.end()) continue;
        w.row(e.name, e.dimension, e.total_contexts, e.eta_crit, 1.0, "paper");
        for (const auto& r : e.rows) w.row(e.name, e.dimension, e.total_contexts, r.eta, r.nu, "paper");
        if (!e.rows.empty()) {
            const auto cal = graph::fit_first_row(e);
            for (std::size_t k = 1; k < e.rows.size(); ++k) {
                w.row(e.name, e.dimension, e.total_contexts, e.rows[k].eta, cal.predict_nu(e.rows[k].eta), "calibrated");
            }
        }
        if (auto g = e.as_graph()) {
            for (const auto& r : e.rows) {
                w.row(e.name, e.dimension, e.total_contexts, r.eta, graph::graph_fraction_required(*g, r.eta, a.delta),
                      "computed");
            }
        }
    }
    return kOk;
}

template <mc::BellInstance Instance>
int simulate_instance(const Instance& inst, const SimulateArgs& a, unsigned threads, CsvWriter& w,
                      std::ostream& err) {
    SamplingPlan plan = chebyshev_plan(inst.num_contexts(), inst.bell_value(), a.epsilon, a.delta);
    if (a.contexts) {
        plan.contexts_required = *a.contexts;
        plan.fraction = static_cast<double>(plan.contexts_required) / static_cast<double>(plan.num_contexts);
        plan.feasible = plan.contexts_required <= plan.num_contexts;
    }
    mc::TrialOptions opts;
    opts.draws = a.draws == "with" ? Draws::with_replacement : Draws::distinct;
    opts.estimation = a.estimation == "exact" ? mc::Estimation::exact : mc::Estimation::finite_rounds;
    if (opts.estimation == mc::Estimation::finite_rounds) {
        plan = with_rounds(plan, a.epsilon_prime, a.delta_prime, inst.per_round_bound());
    }
    if (opts.draws == Draws::distinct && !plan.feasible) {
        err << "infeasible: plan needs " << plan.contexts_required << " distinct contexts but only "
            << plan.num_contexts << " exist\n";
        return kInfeasible;
    }
    w.meta("beta", inst.bell_value());
    w.meta("local_bound", inst.local_bound());
    w.meta("num_contexts", static_cast<double>(plan.num_contexts));
    w.meta("contexts_per_trial", std::to_string(plan.contexts_required));
    if (plan.rounds) w.meta("rounds_per_context", std::to_string(plan.rounds->rounds));
    const auto results = mc::run_trials(inst, plan, opts, a.seed, a.trials, threads);
    w.header({"trial", "Y", "beta_true", "within_epsilon", "certified"});
    std::uint64_t failures = 0;
    std::uint64_t certified = 0;
    for (std::uint64_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        failures += r.within_epsilon ? 0 : 1;
        certified += r.certified ? 1 : 0;
        w.row(k, r.estimate, r.beta_true, r.within_epsilon, r.certified);
    }
    const double t = static_cast<double>(a.trials);
    w.meta("failures", std::to_string(failures));
    w.meta("failure_rate", static_cast<double>(failures) / t);
    w.meta("allowed_rate", a.delta + 3.0 * std::sqrt(a.delta / t));
    w.meta("certified", std::to_string(certified));
    return kOk;
}

inline int run_simulate(const SimulateArgs& a, unsigned threads, CsvWriter& w, std::ostream& err) {
    preamble(w, "simulate");
    w.meta("instance", a.instance);
    w.meta("seed", std::to_string(a.seed));
    w.meta("trials", std::to_string(a.trials));
    w.meta("visibility", a.visibility);
    w.meta("eta", a.efficiency);
    w.meta("epsilon", a.epsilon);
    w.meta("delta", a.delta);
    w.meta("estimation", a.estimation);
    w.meta("draws", a.draws);
    const mc::DetectorModel det{a.efficiency, 0, a.visibility};
    if (a.instance == "chsh") {
        const mc::DenseInstance inst(chsh_inequality(), mc::simulate_detector(chsh_quantum_behavior(1.0), det));
        return simulate_instance(inst, a, threads, w, err);
    }
    w.meta("n", std::to_string(a.n));
    const mc::ProductInstance inst(chsh_inequality(), chsh_quantum_behavior(1.0), a.n, det);
    return simulate_instance(inst, a, threads, w, err);
}

inline int run_validate(const Catalog& cat, CsvWriter& w) {
    const std::string first = serialize_catalog(cat);
    const std::string second = serialize_catalog(parse_catalog(first));
    if (first != second) throw CatalogError("catalog does not round-trip canonically");
    preamble(w, "validate-catalog");
    w.header({"kind", "name", "status"});
    for (const auto& i : cat.inequalities) w.row("inequality", i.name, "ok");
    for (const auto& g : cat.graphs) {
        std::string status = "ok";
        if (g.rows.size() > 1) {
            try {
                graph::calibrate_from_rows(g);
            } catch (const InconsistentRowsError&) {
                status = "ok (rows inconsistent beyond 10%)";
            }
        }
        w.row("graph", g.name, status);
    }
    return kOk;
}

}  // namespace detail

inline int run_command(const Command& cmd, std::ostream& out, std::ostream& err) {
    std::ofstream file;
    std::ostream* sink = &out;
    try {
        const Catalog cat = cmd.global.catalog ? load_catalog(*cmd.global.catalog) : default_catalog();
        std::ostringstream buffer;
        detail::CsvWriter w(buffer, cmd.global.precision);
        const int status = std::visit(
            [&](const auto& p) -> int {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, DesignArgs>) return detail::run_design(p, cat, w, err);
                if constexpr (std::is_same_v<T, PnpTableArgs>) return detail::run_pnp_table(p, w);
                if constexpr (std::is_same_v<T, PnpCurveArgs>) return detail::run_pnp_curve(p, w);
                if constexpr (std::is_same_v<T, GraphNuArgs>) return detail::run_graph_nu(p, cat, w, err);
                if constexpr (std::is_same_v<T, GraphTableArgs>) return detail::run_graph_table(p, cat, w);
                if constexpr (std::is_same_v<T, SimulateArgs>) return detail::run_simulate(p, cmd.global.threads, w, err);
                if constexpr (std::is_same_v<T, ValidateCatalogArgs>) return detail::run_validate(cat, w);
            },
            cmd.params);
        if (cmd.global.out) {
            file.open(*cmd.global.out);
            if (!file) {
                err << "cannot write " << *cmd.global.out << '\n';
                return kIoError;
            }
            sink = &file;
        }
        *sink << buffer.str();
        sink->flush();
        if (!*sink) {
            err << "write failed\n";
            return kIoError;
        }
        return status;
    } catch (const CatalogError& e) {
        err << "catalog error: " << e.what() << '\n';
        return kIoError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const NoViolationError& e) {
        err << "no violation: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

/// Entry point shared by the executable and the tests.
inline int main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    const ParseResult parsed = parse_command(argv);
    if (!parsed.command) {
        (parsed.status == kOk ? out : err) << parsed.message << '\n';
        return parsed.status;
    }
    return run_command(*parsed.command, out, err);
}

}  // namespace sbell::cli
