#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdcpo/graph.hpp"
#include "tdcpo/search.hpp"

namespace tdcpo {

struct RushWindow {
    Minutes start = 0.0;
    Minutes end = 0.0;

    Minutes midpoint() const { return 0.5 * (start + end); }
    bool contains(Minutes t) const { return t >= start && t <= end; }
    friend bool operator==(const RushWindow&, const RushWindow&) = default;
};

inline std::vector<RushWindow> default_rush_windows() { return {{7 * 60.0, 11 * 60.0}, {17 * 60.0, 20 * 60.0}}; }

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void validate_windows(const std::vector<RushWindow>& windows) {
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& w = windows[i];
        if (!(w.start >= 0.0) || !(w.start < w.end) || !std::isfinite(w.end)) {
            throw ConfigError("rush window " + std::to_string(i) + " must satisfy 0 <= start < end");
        }
        if (i > 0 && windows[i - 1].end > w.start) throw ConfigError("rush windows must be sorted and disjoint");
    }
}

struct GenConfig {
    std::size_t rows = 20;
    std::size_t cols = 20;
    double edge_length_m = 100.0;
    double speed_min = 250.0;  // metres per minute
    double speed_max = 400.0;
    double peak_min = 0.30;  // relative travel-time increase at the window midpoint
    double peak_max = 0.35;
    Minutes breakpoint_interval = 30.0;
    std::vector<RushWindow> windows = default_rush_windows();
    double positive_fraction = 0.20;
    int score_min = 0;
    int score_max = 15;
    std::uint64_t seed = 1;

    void validate() const {
        if (rows == 0 || cols == 0) throw ConfigError("grid must have at least one row and column");
        if (!(edge_length_m > 0.0)) throw ConfigError("edge length must be positive");
        if (!(speed_min > 0.0) || !(speed_min <= speed_max)) throw ConfigError("need 0 < speed_min <= speed_max");
        if (!(peak_min >= 0.0) || !(peak_min <= peak_max)) throw ConfigError("need 0 <= peak_min <= peak_max");
        if (!(breakpoint_interval > 0.0)) throw ConfigError("breakpoint interval must be positive");
        if (!(positive_fraction > 0.0 && positive_fraction <= 1.0)) {
            throw ConfigError("positive-score fraction must lie in (0, 1]");
        }
        if (score_min < 0 || score_min > score_max) throw ConfigError("need 0 <= score_min <= score_max");
        validate_windows(windows);
    }
};

// Independent random streams per generator component, all derived from one seed.
enum class RandomStream : std::uint64_t { TravelTime = 1, Score = 2, Query = 3, Instance = 4 };

inline std::mt19937_64 make_stream(std::uint64_t seed, RandomStream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

/// Grid topology: 4-neighbour bidirectional edges of uniform length, no functions yet.
inline std::vector<EdgeSpec> grid_topology(std::size_t rows, std::size_t cols, double length_m) {
    std::vector<EdgeSpec> edges;
    auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            auto add = [&](NodeId a, NodeId b) {
                edges.push_back({a, b, {}, ScoreFunction{}, length_m});
                edges.push_back({b, a, {}, ScoreFunction{}, length_m});
            };
            if (c + 1 < cols) add(id(r, c), id(r, c + 1));
            if (r + 1 < rows) add(id(r, c), id(r + 1, c));
        }
    }
    return edges;
}

struct GeneratedNetwork {
    TDGraph graph;
    std::vector<Minutes> baseline;          // off-peak travel time per edge
    std::vector<std::vector<double>> peak;  // sampled peak increase per edge and window
    std::vector<EdgeId> scored_edges;       // edges selected for a positive score draw
};

namespace detail {

/// Departure samples for one window: every interval step from start to end, plus the
/// end and the midpoint when they fall between steps.
inline std::vector<Minutes> window_samples(const RushWindow& w, Minutes step) {
    std::vector<Minutes> t;
    for (Minutes x = w.start; x < w.end - 1e-9; x += step) t.push_back(x);
    t.push_back(w.end);
    t.push_back(w.midpoint());
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end(), [](Minutes a, Minutes b) { return std::abs(a - b) < 1e-9; }), t.end());
    return t;
}

inline double ramp(const RushWindow& w, Minutes t) {
    double half = 0.5 * (w.end - w.start);
    return std::max(0.0, 1.0 - std::abs(t - w.midpoint()) / half);
}

}  // namespace detail

/// Assigns rush-hour arrival functions and scores to the edges of `topology`
/// (which must carry lengths). Travel times: length / uniform speed off-peak, ramping
/// linearly to (1 + peak) at each window midpoint. Scores: the first floor(p * |E|)
/// edges of a seeded permutation get a uniform integer score, the rest score zero.
inline GeneratedNetwork generate_network(const GenConfig& config, std::size_t node_count,
                                         std::vector<EdgeSpec> topology, std::vector<std::string> names = {}) {
    config.validate();
    auto travel_rng = make_stream(config.seed, RandomStream::TravelTime);
    auto score_rng = make_stream(config.seed, RandomStream::Score);
    std::uniform_real_distribution<double> speed(config.speed_min, config.speed_max);
    std::uniform_real_distribution<double> peak(config.peak_min, config.peak_max);

    std::vector<std::vector<Minutes>> samples;
    for (const auto& w : config.windows) samples.push_back(detail::window_samples(w, config.breakpoint_interval));

    GeneratedNetwork out;
    out.baseline.resize(topology.size());
    out.peak.resize(topology.size());
    for (std::size_t i = 0; i < topology.size(); ++i) {
        auto& spec = topology[i];
        if (!spec.length_m || !(*spec.length_m > 0.0)) {
            throw ConfigError("topology edge " + std::to_string(i) + " needs a positive length_m");
        }
        const Minutes base = quantize_micro(*spec.length_m / speed(travel_rng));
        out.baseline[i] = base;
        spec.arrival.clear();
        if (config.windows.empty()) spec.arrival.push_back({0.0, base});
        for (std::size_t w = 0; w < config.windows.size(); ++w) {
            const auto& window = config.windows[w];
            const double factor = peak(travel_rng);
            out.peak[i].push_back(factor);
            for (Minutes t : samples[w]) {
                Minutes dep = quantize_micro(t);
                if (!spec.arrival.empty() && dep <= spec.arrival.back().departure) continue;  // touching windows
                const double ramp = detail::ramp(window, t);
                Minutes arr = quantize_micro(dep + base * (1.0 + factor * ramp));
                // rounding must not push the realised increase outside [peak_min, peak_max]
                auto increase = [&] { return (arr - dep) / base - 1.0; };
                while (increase() > config.peak_max) arr = quantize_micro(arr - 1e-6);
                while (ramp == 1.0 && increase() < config.peak_min) arr = quantize_micro(arr + 1e-6);
                if (arr - dep < base) arr = quantize_micro(dep + base);
                // FIFO repair: never let a later departure arrive earlier
                if (!spec.arrival.empty() && arr < spec.arrival.back().arrival) arr = spec.arrival.back().arrival;
                spec.arrival.push_back({dep, arr});
            }
        }
    }

    std::vector<EdgeId> order(topology.size());
    std::iota(order.begin(), order.end(), EdgeId{0});
    std::shuffle(order.begin(), order.end(), score_rng);
    std::uniform_int_distribution<int> score(config.score_min, config.score_max);
    // the epsilon keeps products such as 0.29 * 100 from flooring one short
    const auto selected =
        static_cast<std::size_t>(std::floor(config.positive_fraction * static_cast<double>(topology.size()) + 1e-9));
    std::vector<double> drawn(topology.size());
    for (std::size_t k = 0; k < order.size(); ++k) drawn[k] = score(score_rng);
    for (std::size_t k = 0; k < selected; ++k) {
        topology[order[k]].score = ScoreFunction(drawn[k]);
        out.scored_edges.push_back(order[k]);
    }
    std::sort(out.scored_edges.begin(), out.scored_edges.end());

    out.graph = build_graph(node_count, std::move(topology), std::move(names));
    return out;
}

inline GeneratedNetwork generate_network(const GenConfig& config) {
    config.validate();
    return generate_network(config, config.rows * config.cols,
                            grid_topology(config.rows, config.cols, config.edge_length_m));
}

/// Reuses the nodes, edges and lengths of an existing graph.
inline GeneratedNetwork generate_network(const GenConfig& config, const TDGraph& topology) {
    std::vector<EdgeSpec> specs;
    for (const auto& e : topology.edges()) specs.push_back({e.from, e.to, {}, ScoreFunction{}, e.length_m});
    return generate_network(config, topology.node_count(), std::move(specs), topology.node_names());
}

// ---------------------------------------------------------------------------
// Query sets

inline constexpr std::array<Minutes, 5> kBudgetBucketEdges{0.0, 5.0, 10.0, 15.0, 20.0};

/// Set number (1-4) whose half-open budget range contains `budget`.
inline std::optional<int> budget_bucket(Minutes budget) {
    for (std::size_t i = 0; i + 1 < kBudgetBucketEdges.size(); ++i) {
        if (budget >= kBudgetBucketEdges[i] && budget < kBudgetBucketEdges[i + 1]) return static_cast<int>(i + 1);
    }
    return std::nullopt;
}

struct QuerySpec {
    int set = 0;
    NodeId source = 0;
    NodeId destination = 0;
    Minutes t_dep = 0.0;
    Overhead overhead;
    Minutes budget = 0.0;

    QueryContext context() const { return {source, destination, t_dep, overhead, budget, std::nullopt}; }
    friend bool operator==(const QuerySpec&, const QuerySpec&) = default;
};

struct QueryGenConfig {
    std::size_t count_per_set = 200;
    Overhead overhead = Overhead::percent(30.0);
    std::vector<RushWindow> windows = default_rush_windows();
    std::uint64_t seed = 1;
    std::size_t max_attempts = 2'000'000;
};

struct QueryBatch {
    std::array<std::vector<QuerySpec>, 4> sets;
    std::size_t attempts = 0;
    std::size_t unreachable = 0;

    std::vector<QuerySpec> all() const {
        std::vector<QuerySpec> out;
        for (const auto& s : sets) out.insert(out.end(), s.begin(), s.end());
        return out;
    }
};

class SamplingExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection-samples (source, destination, rush-hour departure) triples, derives each
/// budget from the fastest path plus overhead, and files it under its budget bucket
/// until every bucket holds `count_per_set` queries.
inline QueryBatch generate_query_sets(const TDGraph& g, const QueryGenConfig& config) {
    validate_windows(config.windows);
    if (config.windows.empty()) throw ConfigError("query generation needs at least one rush window");
    if (g.node_count() < 2) throw ConfigError("query generation needs at least two nodes");
    derive_budget(1.0, config.overhead);  // validates the overhead

    auto rng = make_stream(config.seed, RandomStream::Query);
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(g.node_count() - 1));
    Minutes total = 0.0;
    for (const auto& w : config.windows) total += w.end - w.start;
    std::uniform_real_distribution<Minutes> offset(0.0, total);

    QueryBatch batch;
    auto full = [&] {
        return std::all_of(batch.sets.begin(), batch.sets.end(),
                           [&](const auto& s) { return s.size() >= config.count_per_set; });
    };
    while (!full()) {
        if (batch.attempts >= config.max_attempts) {
            std::ostringstream msg;
            msg << "query sampling gave up after " << batch.attempts << " attempts; bucket sizes";
            for (const auto& s : batch.sets) msg << ' ' << s.size();
            throw SamplingExhausted(msg.str());
        }
        ++batch.attempts;
        NodeId s = node(rng);
        NodeId d = node(rng);
        Minutes at = offset(rng);
        if (s == d) continue;
        Minutes t_dep = config.windows.back().end;
        for (const auto& w : config.windows) {
            if (at <= w.end - w.start) {
                t_dep = w.start + at;
                break;
            }
            at -= w.end - w.start;
        }
        t_dep = quantize_micro(t_dep);
        auto fastest = td_fastest_path(g, s, d, t_dep);
        if (!fastest) {
            ++batch.unreachable;
            continue;
        }
        Minutes budget = quantize_micro(derive_budget(fastest->arrival - t_dep, config.overhead));
        auto bucket = budget_bucket(budget);
        if (!bucket) continue;
        auto& set = batch.sets[static_cast<std::size_t>(*bucket - 1)];
        if (set.size() >= config.count_per_set) continue;
        set.push_back({*bucket, s, d, t_dep, config.overhead, budget});
    }
    return batch;
}

inline const char* kQueryCsvHeader = "set,source,destination,t_dep,overhead_kind,overhead_value,budget";

inline void write_queries_csv(std::ostream& out, const std::vector<QuerySpec>& queries) {
    out << kQueryCsvHeader << '\n';
    out << std::fixed << std::setprecision(6);
    for (const auto& q : queries) {
        out << q.set << ',' << q.source << ',' << q.destination << ',' << q.t_dep << ','
            << (q.overhead.kind == Overhead::Kind::Absolute ? "abs" : "pct") << ',' << q.overhead.value << ','
            << q.budget << '\n';
    }
}

class QueryFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<QuerySpec> read_queries_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, line.find_last_not_of("\r") + 1) != kQueryCsvHeader) {
        throw QueryFormatError("query file must start with header: " + std::string(kQueryCsvHeader));
    }
    std::vector<QuerySpec> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
        auto fail = [&](const std::string& why) {
            return QueryFormatError("line " + std::to_string(line_no) + ": " + why);
        };
        if (cells.size() != 7) throw fail("expected 7 columns");
        QuerySpec q;
        try {
            std::size_t used = 0;
            auto whole = [&](const std::string& s, auto parse) {
                auto v = parse(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            };
            auto to_u = [](const std::string& s, std::size_t* n) { return std::stoul(s, n); };
            auto to_d = [](const std::string& s, std::size_t* n) { return std::stod(s, n); };
            q.set = static_cast<int>(whole(cells[0], to_u));
            q.source = static_cast<NodeId>(whole(cells[1], to_u));
            q.destination = static_cast<NodeId>(whole(cells[2], to_u));
            q.t_dep = whole(cells[3], to_d);
            q.overhead.value = whole(cells[5], to_d);
            q.budget = whole(cells[6], to_d);
        } catch (const std::logic_error&) {
            throw fail("malformed number");
        }
        if (cells[4] == "abs") q.overhead.kind = Overhead::Kind::Absolute;
        else if (cells[4] == "pct") q.overhead.kind = Overhead::Kind::Percent;
        else throw fail("overhead_kind must be abs or pct");
        out.push_back(q);
    }
    return out;
}

}  // namespace tdcpo
