// Command-line front end: data generation, single queries, benchmark sweeps and
// oracle validation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdcpo/bench.hpp"
#include "tdcpo/datagen.hpp"
#include "tdcpo/graph_io.hpp"
#include "tdcpo/random_instances.hpp"
#include "tdcpo/reference.hpp"
#include "tdcpo/scope.hpp"

namespace {

using namespace tdcpo;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kValidation = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Accepts plain minutes ("450", "7.5") or a clock time ("07:30").
Minutes parse_time(const std::string& text) {
    std::size_t used = 0;
    try {
        if (auto colon = text.find(':'); colon != std::string::npos) {
            int h = std::stoi(text.substr(0, colon), &used);
            if (used != colon) throw std::invalid_argument(text);
            std::string rest = text.substr(colon + 1);
            double m = std::stod(rest, &used);
            if (used != rest.size() || h < 0 || m < 0 || m >= 60) throw std::invalid_argument(text);
            return h * 60.0 + m;
        }
        double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v) || v < 0) throw std::invalid_argument(text);
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("bad time '" + text + "' (expected minutes or HH:MM)");
    }
}

std::vector<RushWindow> parse_windows(const std::vector<std::string>& specs) {
    std::vector<RushWindow> out;
    for (const auto& s : specs) {
        auto dash = s.find('-');
        if (dash == std::string::npos) throw UsageError("rush window '" + s + "' must look like HH:MM-HH:MM");
        out.push_back({parse_time(s.substr(0, dash)), parse_time(s.substr(dash + 1))});
    }
    try {
        validate_windows(out);
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    return out;
}

TDGraph load_graph_or_fail(const std::string& path) {
    try {
        return load_graph(path);
    } catch (const std::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

std::vector<QuerySpec> load_queries(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return read_queries_csv(in);
    } catch (const QueryFormatError& e) {
        throw DataError(path + ": " + e.what());
    }
}

void check_queries(const TDGraph& g, const std::vector<QuerySpec>& queries) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
        try {
            validate_query(g, queries[i].context());
        } catch (const std::invalid_argument& e) {
            throw DataError("query " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

/// Writes through a temporary buffer so a failed run leaves no partial file.
void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw DataError("cannot write " + path);
}

struct OverheadFlags {
    std::optional<double> abs;
    std::optional<double> pct;

    void add(CLI::App* app) {
        auto* a = app->add_option("--overhead-abs", abs, "Budget = fastest travel time + M minutes");
        auto* p = app->add_option("--overhead-pct", pct, "Budget = fastest travel time * (1 + P/100)");
        a->excludes(p);
        a->check(CLI::PositiveNumber);
        p->check(CLI::PositiveNumber);
    }

    std::optional<Overhead> get() const {
        if (abs) return Overhead::absolute(*abs);
        if (pct) return Overhead::percent(*pct);
        return std::nullopt;
    }
};

SolveOptions solve_options(unsigned threads, bool no_pruning, std::optional<std::uint64_t> cap) {
    SolveOptions o = threads <= 1 ? SolveOptions::sequential() : SolveOptions::parallel(threads);
    o.temporal_pruning = !no_pruning;
    o.max_expansions = cap;
    return o;
}

// ---------------------------------------------------------------------------

struct GenNetworkArgs {
    std::string grid = "20x20";
    std::string topology;
    double density = 0.2;
    std::uint64_t seed = 1;
    std::string out;
    bool nonzero_scores = false;
    std::vector<std::string> rush;
};

int cmd_gen_network(const GenNetworkArgs& a) {
    GenConfig cfg;
    cfg.seed = a.seed;
    cfg.positive_fraction = a.density;
    if (a.nonzero_scores) cfg.score_min = 1;
    if (!a.rush.empty()) cfg.windows = parse_windows(a.rush);

    std::optional<GeneratedNetwork> net;
    if (!a.topology.empty()) {
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
        TDGraph topo = load_graph_or_fail(a.topology);
        for (const auto& e : topo.edges()) {
            if (!e.length_m) throw DataError(a.topology + ": every edge needs length_m to derive travel times");
        }
        net = generate_network(cfg, topo);
    } else {
        unsigned rows = 0, cols = 0;
        char x = 0, extra = 0;
        if (std::sscanf(a.grid.c_str(), "%u%c%u%c", &rows, &x, &cols, &extra) != 3 || (x != 'x' && x != 'X') ||
            rows == 0 || cols == 0) {
            throw UsageError("--grid must look like RxC with positive R and C");
        }
        cfg.rows = rows;
        cfg.cols = cols;
        try {
            cfg.validate();
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
        net = generate_network(cfg);
    }
    write_output(a.out, graph_to_string(net->graph));
    std::cerr << "generated " << net->graph.node_count() << " nodes, " << net->graph.edge_count() << " edges, "
              << net->scored_edges.size() << " selected for positive scores\n";
    return kOk;
}

struct GenQueriesArgs {
    std::string graph;
    std::size_t count = 200;
    OverheadFlags overhead;
    std::uint64_t seed = 1;
    std::string out;
    std::size_t max_attempts = 2'000'000;
    std::vector<std::string> rush;
};

int cmd_gen_queries(const GenQueriesArgs& a) {
    QueryGenConfig cfg;
    cfg.count_per_set = a.count;
    cfg.seed = a.seed;
    cfg.max_attempts = a.max_attempts;
    if (auto o = a.overhead.get()) cfg.overhead = *o;
    if (!a.rush.empty()) cfg.windows = parse_windows(a.rush);
    TDGraph g = load_graph_or_fail(a.graph);
    QueryBatch batch;
    try {
        batch = generate_query_sets(g, cfg);
    } catch (const SamplingExhausted& e) {
        throw DataError(e.what());
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    std::ostringstream csv;
    write_queries_csv(csv, batch.all());
    write_output(a.out, csv.str());
    std::cerr << "sampled " << batch.attempts << " candidates (" << batch.unreachable << " unreachable)\n";
    return kOk;
}

struct QueryArgs {
    std::string graph;
    std::string from, to;
    std::string depart = "0";
    std::optional<double> budget;
    OverheadFlags overhead;
    unsigned threads = 1;
    bool no_pruning = false;
    std::optional<std::uint64_t> max_expansions;
};

int cmd_query(const QueryArgs& a) {
    TDGraph g = load_graph_or_fail(a.graph);
    auto s = g.resolve_node(a.from);
    auto d = g.resolve_node(a.to);
    if (!s) throw UsageError("unknown node '" + a.from + "'");
    if (!d) throw UsageError("unknown node '" + a.to + "'");
    Minutes t_dep = parse_time(a.depart);
    auto overhead = a.overhead.get();
    if (a.budget && overhead) throw UsageError("--budget cannot be combined with an overhead flag");
    if (!a.budget && !overhead) throw UsageError("give --budget or one of --overhead-abs / --overhead-pct");

    QueryContext q;
    if (a.budget) {
        if (!(*a.budget >= 0.0)) throw UsageError("--budget must be >= 0");
        q = make_query_with_budget(*s, *d, t_dep, *a.budget);
    } else {
        try {
            q = make_query(g, *s, *d, t_dep, *overhead);
        } catch (const InfeasibleQuery&) {
            nlohmann::ordered_json j;
            j["status"] = "infeasible";
            j["reason"] = "destination unreachable";
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
    }

    auto result = solve(g, q, {}, solve_options(a.threads, a.no_pruning, a.max_expansions));
    nlohmann::ordered_json j;
    j["source"] = g.node_label(q.source);
    j["destination"] = g.node_label(q.destination);
    j["t_dep"] = q.t_dep;
    j["budget"] = q.budget;
    if (q.fastest_travel_time) j["fastest_travel_time"] = *q.fastest_travel_time;
    auto solved = to_json(result, &g);
    for (auto& [k, v] : solved.items()) j[k] = v;
    std::cout << j.dump(2) << '\n';
    return kOk;
}

struct BenchArgs {
    std::string graph, queries, out, metadata;
    std::vector<unsigned> threads{1};
    bool no_pruning = false;
    std::optional<std::uint64_t> max_expansions;
};

int cmd_bench(const BenchArgs& a) {
    TDGraph g = load_graph_or_fail(a.graph);
    auto queries = load_queries(a.queries);
    check_queries(g, queries);
    BenchConfig cfg;
    cfg.threads = a.threads;
    cfg.temporal_pruning = !a.no_pruning;
    cfg.max_expansions = a.max_expansions;
    auto rows = run_bench(g, queries, cfg);

    std::ostringstream csv;
    write_bench_csv(csv, rows);
    write_output(a.out, csv.str());
    for (const auto& r : rows) {
        if (r.exploration_limited) {
            std::cerr << "set " << r.set << ", " << r.threads << " threads: " << r.exploration_limited
                      << " queries hit the expansion cap\n";
        }
    }
    if (!a.metadata.empty()) {
        nlohmann::ordered_json m;
        m["graph"] = a.graph;
        m["queries"] = a.queries;
        m["node_count"] = g.node_count();
        m["edge_count"] = g.edge_count();
        std::size_t scored = 0;
        for (const auto& e : g.edges()) scored += !e.score.is_zero();
        m["scored_edge_fraction"] = g.edge_count() ? double(scored) / double(g.edge_count()) : 0.0;
        std::vector<Overhead> overheads;
        for (const auto& q : queries) {
            if (std::find(overheads.begin(), overheads.end(), q.overhead) == overheads.end()) {
                overheads.push_back(q.overhead);
            }
        }
        auto oh = nlohmann::ordered_json::array();
        for (const auto& o : overheads) {
            oh.push_back({{"kind", o.kind == Overhead::Kind::Absolute ? "abs" : "pct"}, {"value", o.value}});
        }
        m["overheads"] = std::move(oh);
        m["threads"] = a.threads;
        m["pruning"] = !a.no_pruning;
        if (a.max_expansions) m["max_expansions"] = *a.max_expansions;
        auto sets = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            sets.push_back({{"set", r.set},
                            {"threads", r.threads},
                            {"queries", r.queries},
                            {"feasible", r.feasible},
                            {"infeasible", r.infeasible},
                            {"exploration_limited", r.exploration_limited}});
        }
        m["rows"] = std::move(sets);
        write_output(a.metadata, m.dump(2) + "\n");
    }
    return kOk;
}

struct ValidateArgs {
    std::size_t instances = 500;
    std::size_t max_nodes = 12;
    std::uint64_t seed = 1;
    bool inject_fault = false;
    unsigned threads = 1;
};

std::string describe(const std::optional<SolutionPath>& p, const TDGraph& g) {
    return p ? to_json(*p, &g).dump() : std::string("infeasible");
}

int cmd_validate(const ValidateArgs& a) {
    if (a.max_nodes < 2 || a.max_nodes > reference::kOracleNodeLimit) {
        throw UsageError("--max-nodes must lie in [2, " + std::to_string(reference::kOracleNodeLimit) + "]");
    }
    if (a.instances == 0) {
        std::cout << "warning: no instances requested\n0/0 agree\n";
        return kOk;
    }
    auto rng = make_stream(a.seed, RandomStream::Instance);
    RandomInstanceConfig cfg;
    cfg.max_nodes = a.max_nodes;
    auto options = solve_options(a.threads, false, std::nullopt);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < a.instances; ++i) {
        auto inst = random_instance(rng, cfg);
        SolveResult got;
        if (a.inject_fault) {
            auto k = backward_traversal(inst.graph, inst.query.destination, inst.query.t_arr(), inst.query.t_dep);
            got = solve_with_boundaries(inst.graph, inst.query, {}, options, k.shifted(-1.0));
        } else {
            got = solve(inst.graph, inst.query, {}, options);
        }
        auto want = reference::brute_force_tdcpo(inst.graph, inst.query).best;
        bool same = got.path.has_value() == want.has_value() && (!want || got.path->score == want->score);
        if (!same) {
            std::cout << "counterexample at instance " << i + 1 << ":\n"
                      << "graph: " << graph_to_string(inst.graph) << "query: source=" << inst.query.source
                      << " destination=" << inst.query.destination << " t_dep=" << inst.query.t_dep
                      << " budget=" << inst.query.budget << '\n'
                      << "scope:  " << describe(got.path, inst.graph) << '\n'
                      << "oracle: " << describe(want, inst.graph) << '\n'
                      << agree << '/' << a.instances << " agree before the first disagreement\n";
            return kValidation;
        }
        ++agree;
    }
    std::cout << agree << '/' << a.instances << " agree\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-dependent constrained path optimization: generator, solver and benchmark"};
    app.require_subcommand(1);

    GenNetworkArgs gn;
    auto* gen_net = app.add_subcommand("gen-network", "Generate a rush-hour grid network as graph JSON");
    gen_net->add_option("--grid", gn.grid, "Grid size RxC")->capture_default_str();
    gen_net->add_option("--topology", gn.topology, "Reuse nodes, edges and lengths of this graph file");
    gen_net->add_option("--density", gn.density, "Fraction of edges that get a positive score draw, in (0, 1]")
        ->capture_default_str();
    gen_net->add_option("--seed", gn.seed)->capture_default_str();
    gen_net->add_option("--out", gn.out, "Output file (stdout when omitted)");
    gen_net->add_flag("--nonzero-scores", gn.nonzero_scores, "Draw selected scores from [1, 15] instead of [0, 15]");
    gen_net->add_option("--rush", gn.rush, "Rush window HH:MM-HH:MM (repeatable)");

    GenQueriesArgs gq;
    auto* gen_q = app.add_subcommand("gen-queries", "Sample the four budget-bucketed query sets as CSV");
    gen_q->add_option("--graph", gq.graph)->required();
    gen_q->add_option("--count", gq.count, "Queries per set")->capture_default_str();
    gq.overhead.add(gen_q);
    gen_q->add_option("--seed", gq.seed)->capture_default_str();
    gen_q->add_option("--out", gq.out, "Output file (stdout when omitted)");
    gen_q->add_option("--max-attempts", gq.max_attempts)->capture_default_str();
    gen_q->add_option("--rush", gq.rush, "Rush window HH:MM-HH:MM (repeatable)");

    QueryArgs qa;
    auto* query = app.add_subcommand("query", "Solve one query and print the path as JSON");
    query->add_option("--graph", qa.graph)->required();
    query->add_option("--from", qa.from, "Source node name or id")->required();
    query->add_option("--to", qa.to, "Destination node name or id")->required();
    query->add_option("--depart", qa.depart, "Departure time, minutes or HH:MM")->capture_default_str();
    query->add_option("--budget", qa.budget, "Travel-time budget in minutes");
    qa.overhead.add(query);
    query->add_option("--threads", qa.threads)->check(CLI::PositiveNumber)->capture_default_str();
    query->add_flag("--no-pruning", qa.no_pruning, "Disable latest-departure pruning");
    query->add_option("--max-expansions", qa.max_expansions, "Abort after this many labels");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run a query file and report per-set CSV rows");
    bench->add_option("--graph", ba.graph)->required();
    bench->add_option("--queries", ba.queries)->required();
    bench->add_option("--threads", ba.threads, "Thread counts to sweep, e.g. 1,4")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_flag("--no-pruning", ba.no_pruning, "Disable latest-departure pruning");
    bench->add_option("--max-expansions", ba.max_expansions, "Per-query label cap");
    bench->add_option("--out", ba.out, "CSV output file (stdout when omitted)");
    bench->add_option("--metadata", ba.metadata, "Write run metadata as JSON to this file");

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Compare the solver with the brute-force oracle");
    validate->add_option("--instances", va.instances)->capture_default_str();
    validate->add_option("--max-nodes", va.max_nodes)->capture_default_str();
    validate->add_option("--seed", va.seed)->capture_default_str();
    validate->add_option("--threads", va.threads)->check(CLI::PositiveNumber)->capture_default_str();
    validate->add_flag("--inject-fault", va.inject_fault, "Tighten every pruning boundary by one minute");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*gen_net) {
            if (!(gn.density > 0.0 && gn.density <= 1.0)) throw UsageError("--density must lie in (0, 1]");
            return cmd_gen_network(gn);
        }
        if (*gen_q) return cmd_gen_queries(gq);
        if (*query) return cmd_query(qa);
        if (*bench) return cmd_bench(ba);
        if (*validate) return cmd_validate(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}
