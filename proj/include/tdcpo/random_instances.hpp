#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "tdcpo/graph.hpp"
#include "tdcpo/search.hpp"

namespace tdcpo {

/// Small random TD-CPO instances for oracle cross-checks. Times are multiples of a
/// quarter minute and scores are integers, so ties and flat segments occur often.
struct RandomInstanceConfig {
    std::size_t min_nodes = 2;
    std::size_t max_nodes = 12;
    std::size_t max_out_degree = 3;
    std::size_t max_breakpoints = 4;
    Minutes horizon = 60.0;
};

struct RandomInstance {
    TDGraph graph;
    QueryContext query;
};

namespace detail {

inline Minutes quarter(std::mt19937_64& rng, Minutes lo, Minutes hi) {
    std::uniform_int_distribution<int> q(static_cast<int>(lo * 4), static_cast<int>(hi * 4));
    return q(rng) / 4.0;
}

}  // namespace detail

inline TDGraph random_td_graph(std::mt19937_64& rng, std::size_t node_count, const RandomInstanceConfig& config) {
    std::uniform_int_distribution<std::size_t> degree(0, config.max_out_degree);
    std::uniform_int_distribution<std::size_t> breakpoints(1, config.max_breakpoints);
    std::uniform_int_distribution<int> score(0, 10);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(node_count - 1));

    std::vector<EdgeSpec> edges;
    for (NodeId u = 0; u < node_count; ++u) {
        std::set<NodeId> targets;
        std::size_t want = std::min(degree(rng), node_count - 1);
        while (targets.size() < want) {
            NodeId v = node(rng);
            if (v != u) targets.insert(v);
        }
        for (NodeId v : targets) {
            EdgeSpec e{u, v, {}, ScoreFunction{}, std::nullopt};
            std::set<Minutes> departures;
            std::size_t k = breakpoints(rng);
            while (departures.size() < k) departures.insert(detail::quarter(rng, 0.0, config.horizon));
            for (Minutes x : departures) {
                Minutes y = x + detail::quarter(rng, 0.25, 10.0);
                if (!e.arrival.empty()) y = std::max(y, e.arrival.back().arrival);
                e.arrival.push_back({x, y});
            }
            if (coin(rng)) {
                e.score = ScoreFunction(score(rng));
            } else {
                std::set<Minutes> bounds;
                std::uniform_int_distribution<std::size_t> intervals(1, 3);
                std::size_t m = intervals(rng) + 1;
                while (bounds.size() < m) bounds.insert(detail::quarter(rng, 0.0, config.horizon));
                std::vector<double> values;
                for (std::size_t i = 0; i + 1 < m; ++i) values.push_back(score(rng));
                e.score = ScoreFunction({bounds.begin(), bounds.end()}, std::move(values), score(rng));
            }
            edges.push_back(std::move(e));
        }
    }
    return build_graph(node_count, std::move(edges));
}

/// Random graph plus a query. Budgets are usually the fastest travel time stretched by
/// up to 150% plus some slack; about one query in ten is made infeasible on purpose.
inline RandomInstance random_instance(std::mt19937_64& rng, const RandomInstanceConfig& config = {}) {
    std::uniform_int_distribution<std::size_t> size(config.min_nodes, config.max_nodes);
    std::size_t n = size(rng);
    RandomInstance inst{random_td_graph(rng, n, config), {}};

    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    NodeId s = node(rng);
    NodeId d = node(rng);
    if (d == s && unit(rng) < 0.9) d = static_cast<NodeId>((s + 1) % n);
    Minutes t_dep = detail::quarter(rng, 0.0, 30.0);

    Minutes budget;
    auto fastest = td_fastest_path(inst.graph, s, d, t_dep);
    double roll = unit(rng);
    if (!fastest) {
        budget = detail::quarter(rng, 1.0, 30.0);
    } else {
        Minutes travel = fastest->arrival - t_dep;
        budget = roll < 0.1 ? travel * unit(rng) : travel * (1.0 + 1.5 * unit(rng)) + 3.0 * unit(rng);
    }
    inst.query = make_query_with_budget(s, d, t_dep, budget);
    return inst;
}

}  // namespace tdcpo
