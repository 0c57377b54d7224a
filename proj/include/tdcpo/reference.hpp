#pragma once

// Reference algorithms used as test oracles. Nothing here shares search code with
// the SCOPE solver; only the piecewise evaluators and the graph model are common.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "tdcpo/graph.hpp"
#include "tdcpo/scope.hpp"
#include "tdcpo/search.hpp"

namespace tdcpo::reference {

// ---------------------------------------------------------------------------
// MINSUM: minimum distance under a travel-time budget on a static graph.

struct StaticEdge {
    NodeId from = 0;
    NodeId to = 0;
    double distance = 0.0;
    double travel_time = 0.0;
};

struct StaticGraph {
    std::size_t node_count = 0;
    std::vector<StaticEdge> edges;
};

struct MinsumLabel {
    NodeId node = 0;
    double distance = 0.0;
    double travel_time = 0.0;
    std::ptrdiff_t predecessor = -1;  // index into MinsumResult::labels
};

/// Strict dominance: `a` dominates `b` when b is worse on both coordinates.
inline bool dominates(const MinsumLabel& a, const MinsumLabel& b) {
    return b.travel_time > a.travel_time && b.distance > a.distance;
}

struct MinsumPath {
    std::vector<NodeId> nodes;
    double distance = 0.0;
    double travel_time = 0.0;
};

struct MinsumResult {
    std::optional<MinsumPath> best;
    std::vector<MinsumLabel> labels;                // every label ever inserted
    std::vector<std::vector<std::size_t>> pareto;   // surviving label indices per node
    std::vector<std::size_t> discarded;             // inserted, later dominated
    std::size_t rejected = 0;                       // dominated or over budget on arrival

    std::vector<MinsumLabel> pareto_labels(NodeId v) const {
        std::vector<MinsumLabel> out;
        for (auto i : pareto[v]) out.push_back(labels[i]);
        return out;
    }
};

struct MinsumOptions {
    bool check_invariants = false;  // verify every Pareto set after each insertion
};

inline MinsumResult minsum_solve(const StaticGraph& g, NodeId source, NodeId destination, double time_budget,
                                 const MinsumOptions& options = {}) {
    if (source >= g.node_count || destination >= g.node_count) throw std::out_of_range("minsum: node out of range");
    for (const auto& e : g.edges) {
        if (e.from >= g.node_count || e.to >= g.node_count) throw std::invalid_argument("minsum: dangling edge");
        if (e.distance < 0 || e.travel_time < 0) throw std::invalid_argument("minsum: negative edge weight");
    }
    std::vector<std::vector<std::size_t>> out(g.node_count);
    for (std::size_t i = 0; i < g.edges.size(); ++i) out[g.edges[i].from].push_back(i);

    MinsumResult r;
    r.pareto.resize(g.node_count);
    std::vector<char> alive;

    using Entry = std::tuple<double, double, std::size_t>;  // travel time, distance, label
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

    auto on_path = [&](std::ptrdiff_t idx, NodeId v) {
        for (; idx >= 0; idx = r.labels[static_cast<std::size_t>(idx)].predecessor) {
            if (r.labels[static_cast<std::size_t>(idx)].node == v) return true;
        }
        return false;
    };
    auto check = [&] {
        for (const auto& set : r.pareto) {
            for (auto a : set) {
                for (auto b : set) {
                    if (a != b && dominates(r.labels[a], r.labels[b])) {
                        throw std::logic_error("minsum: Pareto set holds a dominated label");
                    }
                }
            }
        }
    };
    auto insert = [&](const MinsumLabel& label) {
        if (label.travel_time > time_budget) {
            ++r.rejected;
            return;
        }
        auto& set = r.pareto[label.node];
        for (auto i : set) {
            const auto& other = r.labels[i];
            if (dominates(other, label) ||
                (other.distance == label.distance && other.travel_time == label.travel_time)) {
                ++r.rejected;
                return;
            }
        }
        std::size_t idx = r.labels.size();
        r.labels.push_back(label);
        alive.push_back(1);
        std::erase_if(set, [&](std::size_t i) {
            if (!dominates(label, r.labels[i])) return false;
            alive[i] = 0;
            r.discarded.push_back(i);
            return true;
        });
        set.push_back(idx);
        heap.emplace(label.travel_time, label.distance, idx);
        if (options.check_invariants) check();
    };

    insert({source, 0.0, 0.0, -1});
    while (!heap.empty()) {
        auto [t, d, idx] = heap.top();
        heap.pop();
        if (!alive[idx]) continue;
        const MinsumLabel cur = r.labels[idx];
        if (cur.node == destination) continue;
        for (auto e : out[cur.node]) {
            const auto& edge = g.edges[e];
            if (on_path(static_cast<std::ptrdiff_t>(idx), edge.to)) continue;
            insert({edge.to, cur.distance + edge.distance, cur.travel_time + edge.travel_time,
                    static_cast<std::ptrdiff_t>(idx)});
        }
    }

    // minimum distance, ties broken by minimum travel time
    std::optional<std::size_t> pick;
    for (auto i : r.pareto[destination]) {
        const auto& l = r.labels[i];
        if (!pick || l.distance < r.labels[*pick].distance ||
            (l.distance == r.labels[*pick].distance && l.travel_time < r.labels[*pick].travel_time)) {
            pick = i;
        }
    }
    if (pick) {
        MinsumPath p{{}, r.labels[*pick].distance, r.labels[*pick].travel_time};
        for (auto i = static_cast<std::ptrdiff_t>(*pick); i >= 0; i = r.labels[static_cast<std::size_t>(i)].predecessor) {
            p.nodes.push_back(r.labels[static_cast<std::size_t>(i)].node);
        }
        std::reverse(p.nodes.begin(), p.nodes.end());
        r.best = std::move(p);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Exhaustive TD-CPO oracle.

inline constexpr std::size_t kOracleNodeLimit = 14;

class OracleGuardError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct OracleResult {
    std::optional<SolutionPath> best;
    std::size_t paths_enumerated = 0;
};

namespace detail {

struct Adjacency {
    std::vector<std::vector<EdgeId>> out;

    explicit Adjacency(const TDGraph& g) : out(g.node_count()) {
        auto edges = g.edges();
        for (EdgeId i = 0; i < edges.size(); ++i) out[edges[i].from].push_back(i);
    }
};

// higher score, then earlier arrival, then smaller node sequence
inline bool preferred(const SolutionPath& a, const SolutionPath& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.arrivals.back() != b.arrivals.back()) return a.arrivals.back() < b.arrivals.back();
    return a.nodes < b.nodes;
}

inline void guard(const TDGraph& g) {
    if (g.node_count() > kOracleNodeLimit) {
        throw OracleGuardError("oracle refuses graphs with more than " + std::to_string(kOracleNodeLimit) +
                               " nodes (got " + std::to_string(g.node_count()) + ")");
    }
}

/// Calls `visit(edges)` for every loopless path from `from` to `to`.
template <class Visit>
void enumerate_simple_paths(const TDGraph& g, const Adjacency& adj, NodeId from, NodeId to, Visit&& visit) {
    std::vector<char> on_path(g.node_count(), 0);
    std::vector<EdgeId> edges;
    std::function<void(NodeId)> dfs = [&](NodeId u) {
        if (u == to) {
            visit(static_cast<const std::vector<EdgeId>&>(edges));
            return;
        }
        for (EdgeId e : adj.out[u]) {
            NodeId v = g.edge(e).to;
            if (on_path[v]) continue;
            on_path[v] = 1;
            edges.push_back(e);
            dfs(v);
            edges.pop_back();
            on_path[v] = 0;
        }
    };
    on_path[from] = 1;
    dfs(from);
}

}  // namespace detail

/// Enumerates every loopless source-destination path, replays it forward from the
/// departure time, and keeps the best feasible one. No pruning of any kind.
inline OracleResult brute_force_tdcpo(const TDGraph& g, const QueryContext& q, const ConstraintSpec& constraints = {}) {
    detail::guard(g);
    validate_query(g, q);
    detail::Adjacency adj(g);
    OracleResult r;
    const Minutes deadline = q.t_arr();
    detail::enumerate_simple_paths(g, adj, q.source, q.destination, [&](const std::vector<EdgeId>& edges) {
        ++r.paths_enumerated;
        SolutionPath p;
        p.nodes.push_back(q.source);
        p.arrivals.push_back(q.t_dep);
        p.extra_costs.assign(constraints.size(), 0.0);
        Minutes t = q.t_dep;
        double score = 0.0;
        for (EdgeId e : edges) {
            const auto& edge = g.edge(e);
            score += edge.score.at(t);
            for (std::size_t c = 0; c < constraints.size(); ++c) p.extra_costs[c] += constraints[c].edge_cost(edge, t);
            t = edge.arrival.arrival(t);
            p.nodes.push_back(edge.to);
            p.arrivals.push_back(t);
        }
        p.score = score;
        if (t > deadline + kTimeTolerance) return;
        for (std::size_t c = 0; c < constraints.size(); ++c) {
            if (p.extra_costs[c] > constraints[c].budget + 1e-9) return;
        }
        if (!r.best || detail::preferred(p, *r.best)) r.best = std::move(p);
    });
    return r;
}

/// Label-setting search that discards labels dominated on (arrival, score). Unsound
/// for loopless maximization; kept to demonstrate why SCOPE avoids dominance pruning.
inline std::optional<SolutionPath> dominance_pruned_tdcpo(const TDGraph& g, const QueryContext& q) {
    validate_query(g, q);
    struct L {
        NodeId node;
        Minutes arrival;
        double score;
        std::ptrdiff_t pred;
    };
    std::vector<L> labels;
    std::vector<char> alive;
    std::vector<std::vector<std::size_t>> sets(g.node_count());
    using Entry = std::tuple<Minutes, double, std::size_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::optional<SolutionPath> best;

    auto path_of = [&](std::size_t idx) {
        SolutionPath p;
        for (auto i = static_cast<std::ptrdiff_t>(idx); i >= 0; i = labels[static_cast<std::size_t>(i)].pred) {
            p.nodes.push_back(labels[static_cast<std::size_t>(i)].node);
            p.arrivals.push_back(labels[static_cast<std::size_t>(i)].arrival);
        }
        std::reverse(p.nodes.begin(), p.nodes.end());
        std::reverse(p.arrivals.begin(), p.arrivals.end());
        p.score = labels[idx].score;
        return p;
    };
    auto on_path = [&](std::size_t idx, NodeId v) {
        for (auto i = static_cast<std::ptrdiff_t>(idx); i >= 0; i = labels[static_cast<std::size_t>(i)].pred) {
            if (labels[static_cast<std::size_t>(i)].node == v) return true;
        }
        return false;
    };
    auto insert = [&](const L& l) {
        auto& set = sets[l.node];
        for (auto i : set) {
            const auto& o = labels[i];
            if (l.arrival > o.arrival && l.score < o.score) return;
        }
        std::size_t idx = labels.size();
        labels.push_back(l);
        alive.push_back(1);
        std::erase_if(set, [&](std::size_t i) {
            bool dominated = labels[i].arrival > l.arrival && labels[i].score < l.score;
            if (dominated) alive[i] = 0;
            return dominated;
        });
        set.push_back(idx);
        heap.emplace(l.arrival, -l.score, idx);
    };

    insert({q.source, q.t_dep, 0.0, -1});
    while (!heap.empty()) {
        auto [t, neg_score, idx] = heap.top();
        heap.pop();
        if (!alive[idx]) continue;
        const L cur = labels[idx];
        if (cur.node == q.destination) {
            auto p = path_of(idx);
            if (!best || detail::preferred(p, *best)) best = std::move(p);
            continue;
        }
        for (EdgeId e : g.out_edges(cur.node)) {
            const auto& edge = g.edge(e);
            if (on_path(idx, edge.to)) continue;
            Minutes at = edge.arrival.arrival(cur.arrival);
            if (at > q.t_arr() + kTimeTolerance) continue;
            insert({edge.to, at, cur.score + edge.score.at(cur.arrival), static_cast<std::ptrdiff_t>(idx)});
        }
    }
    return best;
}

/// Latest departure from every node that reaches `destination` by `deadline`, found
/// by bisection on forward replays of every loopless path. nullopt: no path makes it
/// even when leaving at time zero.
inline std::vector<std::optional<Minutes>> brute_force_latest_departure(const TDGraph& g, NodeId destination,
                                                                        Minutes deadline) {
    detail::guard(g);
    detail::Adjacency adj(g);
    std::vector<std::optional<Minutes>> latest(g.node_count());
    latest[destination] = deadline;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (v == destination) continue;
        detail::enumerate_simple_paths(g, adj, v, destination, [&](const std::vector<EdgeId>& edges) {
            auto replay = [&](Minutes t) {
                for (EdgeId e : edges) t = g.edge(e).arrival.arrival(t);
                return t;
            };
            if (replay(0.0) > deadline) return;
            Minutes lo = 0.0, hi = deadline + 1.0;  // replay(t) >= t, so hi always fails
            for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
                Minutes mid = 0.5 * (lo + hi);
                (replay(mid) <= deadline ? lo : hi) = mid;
            }
            if (!latest[v] || lo > *latest[v]) latest[v] = lo;
        });
    }
    return latest;
}

}  // namespace tdcpo::reference
