#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "tdcpo/random_instances.hpp"
#include "tdcpo/reference.hpp"
#include "tdcpo/scope.hpp"

using namespace tdcpo;
using fixtures::constant_edge;

namespace {

QueryContext toy_query(Minutes budget) { return make_query_with_budget(0, 1, 0.0, budget); }

std::vector<RandomInstance> instances(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::vector<RandomInstance> out;
    for (int i = 0; i < count; ++i) out.push_back(random_instance(rng));
    return out;
}

}  // namespace

TEST(Solve, ToyGraphPrefersDetourWithinBudget) {
    auto r = solve(fixtures::toy_graph(), toy_query(8));
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.path->nodes, (std::vector<NodeId>{0, 2, 1}));
    EXPECT_EQ(r.path->arrivals, (std::vector<Minutes>{0, 3, 5}));
    EXPECT_EQ(r.path->score, 7);
}

TEST(Solve, TightBudgetTakesDirectEdge) {
    auto r = solve(fixtures::toy_graph(), toy_query(2));
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.path->nodes, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(r.path->score, 5);
}

TEST(Solve, BudgetBelowFastestIsInfeasible) {
    auto r = solve(fixtures::toy_graph(), toy_query(1.5));
    EXPECT_EQ(r.status, SolveStatus::Infeasible);
    EXPECT_FALSE(r.path.has_value());
    EXPECT_EQ(r.explored_labels, 0u);
}

TEST(Solve, SourceEqualsDestinationIsSingleNode) {
    auto r = solve(fixtures::toy_graph(), make_query_with_budget(2, 2, 4.0, 3.0));
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.path->nodes, std::vector<NodeId>{2});
    EXPECT_EQ(r.path->score, 0);
    EXPECT_EQ(r.path->travel_time(), 0);
}

TEST(Solve, UnreachableIsInfeasible) {
    EXPECT_EQ(solve(fixtures::toy_graph(), make_query_with_budget(1, 0, 0, 100)).status, SolveStatus::Infeasible);
}

TEST(Solve, InvalidQueryIsRejected) {
    EXPECT_THROW(solve(fixtures::toy_graph(), make_query_with_budget(0, 7, 0, 8)), std::invalid_argument);
    EXPECT_THROW(solve(fixtures::toy_graph(), make_query_with_budget(0, 1, -1, 8)), std::invalid_argument);
}

TEST(Solve, BeatsDominancePruning) {
    auto g = fixtures::dominance_counterexample();
    auto q = make_query_with_budget(0, 3, 0, 6);
    auto r = solve(g, q);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.path->score, 7);
    EXPECT_EQ(r.path->nodes, (std::vector<NodeId>{0, 2, 1, 3}));
}

TEST(Solve, ScoresReadAtDepartureFromTail) {
    // score 9 only when leaving A before time 1
    auto g = build_graph(2, {{0, 1, {{0, 1}}, ScoreFunction({0, 1}, {9}, 2), std::nullopt}});
    EXPECT_EQ(solve(g, make_query_with_budget(0, 1, 0.5, 5)).path->score, 9);
    EXPECT_EQ(solve(g, make_query_with_budget(0, 1, 1.0, 5)).path->score, 2);
}

TEST(Solve, EqualScoresPreferEarlierArrivalThenSmallerSequence) {
    // 0->1->3 and 0->2->3 both score 2; the first arrives later
    auto g = build_graph(4, {constant_edge(0, 1, 1, 1), constant_edge(1, 3, 3, 1), constant_edge(0, 2, 1, 1),
                             constant_edge(2, 3, 1, 1)});
    EXPECT_EQ(solve(g, make_query_with_budget(0, 3, 0, 10)).path->nodes, (std::vector<NodeId>{0, 2, 3}));
    auto h = build_graph(4, {constant_edge(0, 1, 1, 1), constant_edge(1, 3, 1, 1), constant_edge(0, 2, 1, 1),
                             constant_edge(2, 3, 1, 1)});
    EXPECT_EQ(solve(h, make_query_with_budget(0, 3, 0, 10)).path->nodes, (std::vector<NodeId>{0, 1, 3}));
}

TEST(Children, SourceLabelExpandsToBothNeighbours) {
    auto g = fixtures::toy_graph();
    auto q = toy_query(8);
    auto k = backward_traversal(g, 1, q.t_arr(), q.t_dep);
    ScopeSearch search(g, q, k);
    Label l1{0, 0, 0, {}, nullptr};
    VisitedSet visited(3);
    visited.insert(0);
    auto kids = search.children(l1, visited);
    ASSERT_EQ(kids.size(), 2u);
    EXPECT_EQ(kids[0].node, 1u);
    EXPECT_EQ(kids[0].arrival, 2);
    EXPECT_EQ(kids[0].score, 5);
    EXPECT_EQ(kids[0].predecessor, &l1);
    EXPECT_EQ(kids[1].node, 2u);
    EXPECT_EQ(kids[1].arrival, 3);
    EXPECT_EQ(kids[1].score, 0);
}

TEST(Children, VisitedNodeIsNotRevisited) {
    auto g = fixtures::toy_graph();
    auto q = toy_query(8);
    auto k = backward_traversal(g, 1, q.t_arr(), q.t_dep);
    ScopeSearch search(g, q, k);
    Label l1{0, 0, 0, {}, nullptr};
    Label l3{2, 3, 0, {}, &l1};
    VisitedSet visited(3);
    visited.insert(0);
    visited.insert(2);
    auto kids = search.children(l3, visited);
    ASSERT_EQ(kids.size(), 1u);
    EXPECT_EQ(kids[0].node, 1u);
    EXPECT_EQ(kids[0].score, 7);
    EXPECT_EQ(kids[0].arrival, 5);
}

TEST(Children, ArrivalsPastBoundaryAreDropped) {
    auto g = fixtures::toy_graph();
    auto q = toy_query(4);  // K(C) = 2, but C is reached at 3
    auto k = backward_traversal(g, 1, q.t_arr(), q.t_dep);
    ScopeSearch search(g, q, k);
    Label l1{0, 0, 0, {}, nullptr};
    VisitedSet visited(3);
    visited.insert(0);
    auto kids = search.children(l1, visited);
    ASSERT_EQ(kids.size(), 1u);
    EXPECT_EQ(kids[0].node, 1u);
}

TEST(ProcessLabel, ContinuesFromGivenPrefix) {
    auto g = fixtures::toy_graph();
    auto q = toy_query(8);
    auto k = backward_traversal(g, 1, q.t_arr(), q.t_dep);
    ScopeSearch search(g, q, k);
    Label l1{0, 0, 0, {}, nullptr};
    Label l2{1, 2, 5, {}, &l1};
    VisitedSet visited(3);
    visited.insert(0);
    visited.insert(1);
    auto r = search.process_label(l2, visited);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    EXPECT_EQ(r.path->nodes, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(r.path->score, 5);
}

TEST(Reconstruct, FollowsPredecessorChain) {
    auto g = fixtures::toy_graph();
    Label l1{0, 0, 0, {}, nullptr};
    Label l3{2, 3, 0, {}, &l1};
    Label l5{1, 5, 7, {}, &l3};
    auto p = reconstruct_path(l5, g);
    EXPECT_EQ(p.nodes, (std::vector<NodeId>{0, 2, 1}));
    EXPECT_EQ(p.arrivals, (std::vector<Minutes>{0, 3, 5}));
    EXPECT_EQ(p.score, 7);
}

TEST(Reconstruct, SourceOnlyLabel) {
    Label l1{0, 4, 0, {}, nullptr};
    auto p = reconstruct_path(l1, fixtures::toy_graph());
    EXPECT_EQ(p.nodes, std::vector<NodeId>{0});
    EXPECT_EQ(p.arrivals, std::vector<Minutes>{4});
}

TEST(Reconstruct, RepeatedNodeIsConsistencyError) {
    auto g = fixtures::toy_graph();
    Label l1{0, 0, 0, {}, nullptr};
    Label l3{2, 3, 0, {}, &l1};
    Label forged{0, 4, 4, {}, &l3};
    EXPECT_THROW(reconstruct_path(forged, g), PathConsistencyError);
}

TEST(Reconstruct, WrongStoredTimeIsConsistencyError) {
    auto g = fixtures::toy_graph();
    Label l1{0, 0, 0, {}, nullptr};
    Label bad{1, 2.5, 5, {}, &l1};
    EXPECT_THROW(reconstruct_path(bad, g), PathConsistencyError);
    Label missing{2, 2, 0, {}, nullptr};
    Label jump{1, 2, 0, {}, &missing};
    Label from_b{0, 3, 0, {}, &jump};
    EXPECT_THROW(reconstruct_path(from_b, g), PathConsistencyError);
}

TEST(Constraints, LengthBudgetExcludesLongDetour) {
    auto specs = std::vector<EdgeSpec>{{0, 1, {{0, 2}}, ScoreFunction(5), 100.0},
                                       {0, 2, {{0, 3}}, ScoreFunction(0), 300.0},
                                       {2, 1, {{0, 2}}, ScoreFunction(7), 300.0}};
    auto g = build_graph(3, specs);
    auto q = toy_query(8);
    EXPECT_EQ(solve(g, q).path->score, 7);
    auto r = solve(g, q, {length_constraint(500)});
    EXPECT_EQ(r.path->nodes, (std::vector<NodeId>{0, 1}));
    EXPECT_EQ(r.path->extra_costs, std::vector<double>{100});
    EXPECT_EQ(solve(g, q, {length_constraint(50)}).status, SolveStatus::Infeasible);
}

TEST(Constraints, MatchOracleOnRandomInstances) {
    auto constraint = Constraint{"hops", [](const TDEdge&, Minutes) { return 1.0; }, 3.0};
    for (auto& inst : instances(31, 200)) {
        auto r = solve(inst.graph, inst.query, {constraint});
        auto o = reference::brute_force_tdcpo(inst.graph, inst.query, {constraint}).best;
        ASSERT_EQ(r.path.has_value(), o.has_value());
        if (o) {
            EXPECT_EQ(r.path->score, o->score);
            EXPECT_LE(r.path->edge_count(), 3u);
        }
    }
}

TEST(Constraints, RejectsNonPositiveBudget) {
    EXPECT_THROW(solve(fixtures::toy_graph(), toy_query(8), {length_constraint(0)}), std::invalid_argument);
}

TEST(Properties, ExactAgainstOracle) {
    for (auto& inst : instances(32, 300)) {
        auto r = solve(inst.graph, inst.query);
        auto o = reference::brute_force_tdcpo(inst.graph, inst.query).best;
        ASSERT_EQ(r.path.has_value(), o.has_value());
        if (o) {
            EXPECT_EQ(r.path->score, o->score);
            EXPECT_EQ(*r.path, *o);  // shared tie-breaking gives the same path
        }
    }
}

TEST(Properties, LooplessAndWithinBudget) {
    for (auto& inst : instances(33, 300)) {
        auto r = solve(inst.graph, inst.query);
        if (!r.path) continue;
        const auto& p = *r.path;
        std::set<NodeId> distinct(p.nodes.begin(), p.nodes.end());
        EXPECT_EQ(distinct.size(), p.nodes.size());
        EXPECT_EQ(p.nodes.front(), inst.query.source);
        EXPECT_EQ(p.nodes.back(), inst.query.destination);
        // forward replay
        Minutes t = inst.query.t_dep;
        double score = 0;
        for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
            const auto& e = inst.graph.edge(*inst.graph.find_edge(p.nodes[i], p.nodes[i + 1]));
            score += e.score.at(t);
            t = e.arrival.arrival(t);
            EXPECT_NEAR(t, p.arrivals[i + 1], 1e-9);
        }
        EXPECT_LE(t, inst.query.t_arr() + 1e-9);
        EXPECT_EQ(score, p.score);
    }
}

TEST(Properties, PruningIsSoundAndNeverExploresMore) {
    int strict = 0, feasible = 0;
    auto off = SolveOptions::sequential();
    off.temporal_pruning = false;
    for (auto& inst : instances(34, 300)) {
        auto on = solve(inst.graph, inst.query);
        auto no = solve(inst.graph, inst.query, {}, off);
        ASSERT_EQ(on.path.has_value(), no.path.has_value());
        if (on.path) { EXPECT_EQ(on.path->score, no.path->score); }
        EXPECT_LE(on.explored_labels, no.explored_labels);
        strict += on.explored_labels < no.explored_labels;
        feasible += on.path.has_value();
    }
    EXPECT_GT(strict, 0);
    EXPECT_GT(feasible, 100);
}

TEST(Properties, ParallelMatchesSequential) {
    for (auto& inst : instances(35, 150)) {
        auto seq = solve(inst.graph, inst.query);
        for (unsigned threads : {2u, 4u, 8u}) {
            auto options = SolveOptions::parallel(threads);
            options.fork_depth = 64;  // fork at every level to stress the reduction
            auto par = solve(inst.graph, inst.query, {}, options);
            ASSERT_EQ(par.status, seq.status);
            if (seq.path) { EXPECT_EQ(*par.path, *seq.path); }
            EXPECT_EQ(par.explored_labels, seq.explored_labels);
        }
    }
}

TEST(Properties, InjectedBoundaryFaultIsDetected) {
    int disagreements = 0;
    for (auto& inst : instances(36, 200)) {
        const auto& q = inst.query;
        auto k = backward_traversal(inst.graph, q.destination, q.t_arr(), q.t_dep).shifted(-1.0);
        auto r = solve_with_boundaries(inst.graph, q, {}, SolveOptions::sequential(), k);
        auto o = reference::brute_force_tdcpo(inst.graph, q).best;
        if (r.path.has_value() != o.has_value() || (o && r.path->score != o->score)) ++disagreements;
    }
    EXPECT_GT(disagreements, 0);
}

TEST(ExpansionCap, StopsWithExplorationLimit) {
    auto g = fixtures::toy_graph();
    auto options = SolveOptions::sequential();
    options.max_expansions = 2;
    auto r = solve(g, toy_query(8), {}, options);
    EXPECT_EQ(r.status, SolveStatus::ExplorationLimit);
    EXPECT_FALSE(r.path.has_value());
    options.max_expansions = 4;
    EXPECT_EQ(solve(g, toy_query(8), {}, options).status, SolveStatus::Optimal);
}

TEST(ExpansionCap, ParallelModeAlsoStops) {
    auto grid = [] {
        std::vector<EdgeSpec> e;
        for (NodeId r = 0; r < 5; ++r)
            for (NodeId c = 0; c < 5; ++c) {
                NodeId v = r * 5 + c;
                if (c < 4) {
                    e.push_back(constant_edge(v, v + 1, 1, 1));
                    e.push_back(constant_edge(v + 1, v, 1, 1));
                }
                if (r < 4) {
                    e.push_back(constant_edge(v, v + 5, 1, 1));
                    e.push_back(constant_edge(v + 5, v, 1, 1));
                }
            }
        return build_graph(25, e);
    }();
    auto options = SolveOptions::parallel(4);
    options.max_expansions = 10000;
    auto r = solve(grid, make_query_with_budget(0, 24, 0, 24), {}, options);
    EXPECT_EQ(r.status, SolveStatus::ExplorationLimit);
}

TEST(Json, SerializesPathWithNames) {
    auto g = fixtures::toy_graph();
    auto j = to_json(solve(g, toy_query(8)), &g);
    EXPECT_EQ(j.dump(), R"({"status":"optimal","path":{"nodes":["A","C","B"],"arrivals":[0.0,3.0,5.0],"score":7.0,"travel_time":5.0},"explored_labels":4})");
}
