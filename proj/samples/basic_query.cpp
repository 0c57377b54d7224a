// Builds a three-node network in code, solves one query and prints the path.

#include <iostream>

#include "tdcpo/scope.hpp"

int main() {
    using namespace tdcpo;
    // A=0, B=1, C=2; every edge has a constant travel time and score
    auto edge = [](NodeId from, NodeId to, Minutes travel, double score) {
        return EdgeSpec{from, to, {{0.0, travel}}, ScoreFunction(score), std::nullopt};
    };
    TDGraph g = build_graph(3, {edge(0, 1, 2, 5), edge(0, 2, 3, 0), edge(2, 0, 1, 4), edge(2, 1, 2, 7)},
                            {"A", "B", "C"});

    for (Minutes budget : {8.0, 2.0}) {
        auto result = solve(g, make_query_with_budget(0, 1, 0.0, budget));
        std::cout << "budget " << budget << ": " << to_json(result, &g).dump() << '\n';
    }
}
