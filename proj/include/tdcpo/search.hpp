#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdcpo/graph.hpp"

namespace tdcpo {

struct FastestPath {
    Minutes arrival = 0.0;
    std::vector<NodeId> nodes;
};

/// Time-dependent Dijkstra: earliest arrival at `destination` when leaving `source`
/// at `departure`, evaluating each edge at the actual arrival time at its tail.
/// Correct because every edge is FIFO.
inline std::optional<FastestPath> td_fastest_path(const TDGraph& g, NodeId source, NodeId destination,
                                                  Minutes departure) {
    const auto n = g.node_count();
    if (source >= n || destination >= n) throw std::out_of_range("td_fastest_path: node out of range");

    std::vector<Minutes> best(n, kInfiniteTime);
    std::vector<NodeId> parent(n, kInvalidNode);
    std::vector<char> closed(n, 0);
    using Entry = std::pair<Minutes, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    best[source] = departure;
    frontier.emplace(departure, source);
    while (!frontier.empty()) {
        auto [t, u] = frontier.top();
        frontier.pop();
        if (closed[u]) continue;
        closed[u] = 1;
        if (u == destination) break;
        for (EdgeId e : g.out_edges(u)) {
            const auto& edge = g.edge(e);
            Minutes at = edge.arrival.arrival(t);
            if (at < best[edge.to]) {
                best[edge.to] = at;
                parent[edge.to] = u;
                frontier.emplace(at, edge.to);
            }
        }
    }
    if (!closed[destination]) return std::nullopt;

    FastestPath path{best[destination], {}};
    for (NodeId v = destination; v != kInvalidNode; v = (v == source ? kInvalidNode : parent[v])) {
        path.nodes.push_back(v);
    }
    std::reverse(path.nodes.begin(), path.nodes.end());
    return path;
}

/// Allowed slack over the fastest travel time, either in minutes or as a percentage.
struct Overhead {
    enum class Kind { Absolute, Percent };

    Kind kind = Kind::Percent;
    double value = 0.0;

    static Overhead absolute(Minutes minutes) { return {Kind::Absolute, minutes}; }
    static Overhead percent(double pct) { return {Kind::Percent, pct}; }

    friend bool operator==(const Overhead&, const Overhead&) = default;
};

class InfeasibleQuery : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Minutes derive_budget(Minutes fastest_travel_time, const Overhead& overhead) {
    if (!(overhead.value > 0.0) || !std::isfinite(overhead.value)) {
        throw std::invalid_argument("overhead must be positive and finite");
    }
    return overhead.kind == Overhead::Kind::Absolute ? fastest_travel_time + overhead.value
                                                     : fastest_travel_time * (1.0 + overhead.value / 100.0);
}

struct QueryContext {
    NodeId source = 0;
    NodeId destination = 0;
    Minutes t_dep = 0.0;
    std::optional<Overhead> overhead;  // empty when the budget was given directly
    Minutes budget = 0.0;
    std::optional<Minutes> fastest_travel_time;

    Minutes t_arr() const { return t_dep + budget; }
};

/// Builds a query whose budget is the fastest travel time plus `overhead`.
/// Throws InfeasibleQuery when the destination cannot be reached.
inline QueryContext make_query(const TDGraph& g, NodeId source, NodeId destination, Minutes t_dep,
                               const Overhead& overhead) {
    auto fastest = td_fastest_path(g, source, destination, t_dep);
    if (!fastest) {
        throw InfeasibleQuery("destination " + g.node_label(destination) + " is unreachable from " +
                              g.node_label(source));
    }
    Minutes travel = fastest->arrival - t_dep;
    return {source, destination, t_dep, overhead, derive_budget(travel, overhead), travel};
}

inline QueryContext make_query_with_budget(NodeId source, NodeId destination, Minutes t_dep, Minutes budget) {
    return {source, destination, t_dep, std::nullopt, budget, std::nullopt};
}

inline void validate_query(const TDGraph& g, const QueryContext& q) {
    if (q.source >= g.node_count() || q.destination >= g.node_count()) {
        throw std::invalid_argument("query endpoint outside the graph");
    }
    if (!std::isfinite(q.t_dep) || q.t_dep < 0.0) throw std::invalid_argument("departure time must be >= 0");
    if (!std::isfinite(q.budget) || q.budget < 0.0) throw std::invalid_argument("budget must be >= 0");
}

/// Latest departure time from each node that still reaches the destination by the
/// deadline. Nodes without a label at or after the query departure are unreachable.
class LatestDepartureMap {
public:
    LatestDepartureMap() = default;

    /// Every node gets an infinite boundary; used to switch temporal pruning off.
    static LatestDepartureMap unbounded(std::size_t node_count) {
        LatestDepartureMap m;
        m.latest_.assign(node_count, kInfiniteTime);
        m.next_edge_.assign(node_count, kInvalidEdge);
        return m;
    }

    bool reachable(NodeId v) const { return latest_[v] != -kInfiniteTime; }
    std::optional<Minutes> at(NodeId v) const {
        return reachable(v) ? std::optional<Minutes>(latest_[v]) : std::nullopt;
    }
    // -inf for unreachable nodes
    Minutes boundary(NodeId v) const { return latest_[v]; }
    std::span<const Minutes> boundaries() const noexcept { return latest_; }
    std::size_t size() const noexcept { return latest_.size(); }

    /// First edge of a witness path from v toward the destination.
    EdgeId witness_edge(NodeId v) const { return next_edge_[v]; }

    /// Shifts every finite boundary; test hook for mutation checks.
    LatestDepartureMap shifted(Minutes delta) const {
        LatestDepartureMap m = *this;
        for (auto& t : m.latest_) {
            if (std::isfinite(t)) t += delta;
        }
        return m;
    }

private:
    friend LatestDepartureMap backward_traversal(const TDGraph&, NodeId, Minutes, Minutes);

    std::vector<Minutes> latest_;
    std::vector<EdgeId> next_edge_;
};

/// Reverse label-setting from the destination with a max-ordered frontier: the node
/// with the largest latest-departure label is closed first, and each incoming edge
/// is relaxed through the inverse of its arrival function. Stops once the frontier
/// is empty or its top falls below `t_dep`.
inline LatestDepartureMap backward_traversal(const TDGraph& g, NodeId destination, Minutes t_arr, Minutes t_dep) {
    const auto n = g.node_count();
    if (destination >= n) throw std::out_of_range("backward_traversal: destination out of range");
    if (t_arr < t_dep) throw std::invalid_argument("backward_traversal: t_arr < t_dep");

    std::vector<Minutes> label(n, -kInfiniteTime);
    std::vector<EdgeId> via(n, kInvalidEdge);
    std::vector<char> closed(n, 0);

    struct Entry {
        Minutes time;
        NodeId node;
    };
    // max-heap on time, smaller node id first on ties
    auto lower_priority = [](const Entry& a, const Entry& b) {
        return a.time < b.time || (a.time == b.time && a.node > b.node);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)> frontier(lower_priority);

    label[destination] = t_arr;
    frontier.push({t_arr, destination});
    while (!frontier.empty()) {
        auto [t, v] = frontier.top();
        if (t < t_dep - kTimeTolerance) break;
        frontier.pop();
        if (closed[v] || t != label[v]) continue;
        closed[v] = 1;
        for (EdgeId e : g.in_edges(v)) {
            const auto& edge = g.edge(e);
            if (closed[edge.from]) continue;
            auto dep = edge.arrival.latest_departure(t);
            if (dep && *dep > label[edge.from]) {
                label[edge.from] = *dep;
                via[edge.from] = e;
                frontier.push({*dep, edge.from});
            }
        }
    }

    LatestDepartureMap out;
    out.latest_.resize(n);
    out.next_edge_ = std::move(via);
    for (NodeId v = 0; v < n; ++v) {
        bool usable = time_leq(t_dep, label[v]);
        out.latest_[v] = usable ? label[v] : -kInfiniteTime;
        if (!usable) out.next_edge_[v] = kInvalidEdge;
    }
    return out;
}

}  // namespace tdcpo
