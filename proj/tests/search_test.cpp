#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "tdcpo/random_instances.hpp"
#include "tdcpo/reference.hpp"
#include "tdcpo/search.hpp"

using namespace tdcpo;
using fixtures::constant_edge;

TEST(FastestPath, ToyGraphUsesDirectEdge) {
    auto f = td_fastest_path(fixtures::toy_graph(), 0, 1, 0);
    ASSERT_TRUE(f.has_value());
    EXPECT_DOUBLE_EQ(f->arrival, 2);
    EXPECT_EQ(f->nodes, (std::vector<NodeId>{0, 1}));
}

TEST(FastestPath, SameNodeArrivesAtDeparture) {
    auto f = td_fastest_path(fixtures::toy_graph(), 2, 2, 7);
    ASSERT_TRUE(f.has_value());
    EXPECT_DOUBLE_EQ(f->arrival, 7);
    EXPECT_EQ(f->nodes, std::vector<NodeId>{2});
}

TEST(FastestPath, UnreachableIsEmpty) {
    EXPECT_FALSE(td_fastest_path(fixtures::toy_graph(), 1, 0, 0).has_value());
}

TEST(FastestPath, WaitsOutCongestionOnlyThroughFunctions) {
    // direct edge is slow at departure 0, the detour is fast
    auto g = build_graph(3, {{0, 1, {{0, 10}, {5, 10}}, ScoreFunction{}, std::nullopt},
                             constant_edge(0, 2, 1, 0), constant_edge(2, 1, 1, 0)});
    auto f = td_fastest_path(g, 0, 1, 0);
    EXPECT_DOUBLE_EQ(f->arrival, 2);
    EXPECT_EQ(f->nodes, (std::vector<NodeId>{0, 2, 1}));
}

TEST(FastestPath, MatchesOracleMinimumOnRandomGraphs) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(rng);
        const auto& q = inst.query;
        auto f = td_fastest_path(inst.graph, q.source, q.destination, q.t_dep);
        // a huge budget turns the oracle into an exhaustive fastest-arrival search
        std::optional<Minutes> best;
        auto wide = make_query_with_budget(q.source, q.destination, q.t_dep, 1e6);
        reference::detail::Adjacency adj(inst.graph);
        reference::detail::enumerate_simple_paths(inst.graph, adj, q.source, q.destination,
                                                  [&](const std::vector<EdgeId>& edges) {
                                                      Minutes t = wide.t_dep;
                                                      for (EdgeId e : edges) t = inst.graph.edge(e).arrival.arrival(t);
                                                      if (!best || t < *best) best = t;
                                                  });
        ASSERT_EQ(f.has_value(), best.has_value());
        if (best) { EXPECT_DOUBLE_EQ(f->arrival, *best); }
    }
}

TEST(Budget, AbsoluteOverheadAdds) { EXPECT_DOUBLE_EQ(derive_budget(10, Overhead::absolute(2)), 12); }

TEST(Budget, PercentOverheadScales) { EXPECT_DOUBLE_EQ(derive_budget(10, Overhead::percent(30)), 13); }

TEST(Budget, RejectsNonPositiveOverhead) {
    EXPECT_THROW(derive_budget(10, Overhead::percent(0)), std::invalid_argument);
    EXPECT_THROW(derive_budget(10, Overhead::absolute(-1)), std::invalid_argument);
}

TEST(Budget, UnreachableDestinationIsInfeasibleQuery) {
    EXPECT_THROW(make_query(fixtures::toy_graph(), 1, 0, 0, Overhead::percent(30)), InfeasibleQuery);
}

TEST(Budget, QueryCarriesFastestTime) {
    auto q = make_query(fixtures::toy_graph(), 0, 1, 0, Overhead::percent(30));
    EXPECT_DOUBLE_EQ(*q.fastest_travel_time, 2);
    EXPECT_DOUBLE_EQ(q.budget, 2.6);
    EXPECT_DOUBLE_EQ(q.t_arr(), 2.6);
}

TEST(BackwardTraversal, DestinationGetsDeadline) {
    auto k = backward_traversal(fixtures::toy_graph(), 1, 8, 0);
    EXPECT_DOUBLE_EQ(*k.at(1), 8);
}

TEST(BackwardTraversal, ToyGraphMatchesExhaustiveLatestDeparture) {
    auto g = fixtures::toy_graph();
    auto k = backward_traversal(g, 1, 8, 0);
    auto want = reference::brute_force_latest_departure(g, 1, 8);
    for (NodeId v = 0; v < 3; ++v) {
        ASSERT_TRUE(want[v].has_value());
        EXPECT_NEAR(*k.at(v), *want[v], 1e-6) << g.node_label(v);
    }
    EXPECT_DOUBLE_EQ(*k.at(0), 6);
    EXPECT_DOUBLE_EQ(*k.at(2), 6);
}

TEST(BackwardTraversal, ChainBoundariesAreFiveSixSeven) {
    auto k = backward_traversal(fixtures::unit_chain(), 3, 8, 0);
    EXPECT_DOUBLE_EQ(*k.at(0), 5);
    EXPECT_DOUBLE_EQ(*k.at(1), 6);
    EXPECT_DOUBLE_EQ(*k.at(2), 7);
    EXPECT_DOUBLE_EQ(*k.at(3), 8);
}

TEST(BackwardTraversal, NodesBelowDepartureAreUnreachable) {
    auto k = backward_traversal(fixtures::unit_chain(), 3, 8, 5.5);
    EXPECT_FALSE(k.reachable(0));
    EXPECT_EQ(k.boundary(0), -kInfiniteTime);
    EXPECT_DOUBLE_EQ(*k.at(1), 6);
}

TEST(BackwardTraversal, NodesWithoutPathAreUnreachable) {
    auto k = backward_traversal(fixtures::toy_graph(), 0, 10, 0);
    EXPECT_FALSE(k.reachable(1));
    EXPECT_DOUBLE_EQ(*k.at(2), 9);
}

TEST(BackwardTraversal, LabelsAreSoundAlongWitnessEdges) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 300; ++i) {
        auto inst = random_instance(rng);
        const auto& q = inst.query;
        auto k = backward_traversal(inst.graph, q.destination, q.t_arr(), q.t_dep);
        for (NodeId v = 0; v < inst.graph.node_count(); ++v) {
            if (!k.reachable(v) || v == q.destination) continue;
            Minutes t = *k.at(v);
            NodeId u = v;
            for (std::size_t steps = 0; u != q.destination; ++steps) {
                ASSERT_LT(steps, inst.graph.node_count()) << "witness chain loops";
                EdgeId e = k.witness_edge(u);
                ASSERT_NE(e, kInvalidEdge);
                t = inst.graph.edge(e).arrival.arrival(t);
                u = inst.graph.edge(e).to;
            }
            EXPECT_LE(t, q.t_arr() + 1e-9);
        }
    }
}

TEST(BackwardTraversal, MaximalOnSmallGraphs) {
    std::mt19937_64 rng(23);
    RandomInstanceConfig cfg;
    cfg.max_nodes = 10;
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(rng, cfg);
        const auto& q = inst.query;
        auto k = backward_traversal(inst.graph, q.destination, q.t_arr(), 0.0);
        auto want = reference::brute_force_latest_departure(inst.graph, q.destination, q.t_arr());
        for (NodeId v = 0; v < inst.graph.node_count(); ++v) {
            ASSERT_EQ(k.reachable(v), want[v].has_value()) << "instance " << i << " node " << v;
            if (want[v]) { EXPECT_NEAR(*k.at(v), *want[v], 1e-6); }
        }
    }
}

TEST(BackwardTraversal, LargerDeadlineNeverShrinksLabels) {
    std::mt19937_64 rng(24);
    for (int i = 0; i < 200; ++i) {
        auto inst = random_instance(rng);
        const auto& q = inst.query;
        auto tight = backward_traversal(inst.graph, q.destination, q.t_arr(), 0.0);
        auto loose = backward_traversal(inst.graph, q.destination, q.t_arr() + 3.0, 0.0);
        for (NodeId v = 0; v < inst.graph.node_count(); ++v) {
            EXPECT_GE(loose.boundary(v), tight.boundary(v));
        }
    }
}

TEST(BackwardTraversal, RejectsDeadlineBeforeDeparture) {
    EXPECT_THROW(backward_traversal(fixtures::toy_graph(), 1, 1, 2), std::invalid_argument);
}
