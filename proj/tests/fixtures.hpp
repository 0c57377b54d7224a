#pragma once

#include <string>
#include <vector>

#include "tdcpo/graph.hpp"
#include "tdcpo/reference.hpp"

namespace tdcpo::fixtures {

inline EdgeSpec constant_edge(NodeId from, NodeId to, Minutes travel, double score) {
    return EdgeSpec{from, to, {{0.0, travel}}, ScoreFunction(score), std::nullopt};
}

// A=0, B=1, C=2. From A at time 0: A->B arrives 2 (score 5), A->C arrives 3 (score 0);
// from C at 3: C->A arrives 4 (score 4), C->B arrives 5 (score 7).
inline TDGraph toy_graph() {
    return build_graph(3,
                       {constant_edge(0, 1, 2, 5), constant_edge(0, 2, 3, 0), constant_edge(2, 0, 1, 4),
                        constant_edge(2, 1, 2, 7)},
                       {"A", "B", "C"});
}

// A->B->C->D with unit travel times; with deadline 8 at D the latest departures are
// A 5, B 6, C 7.
inline TDGraph unit_chain() {
    return build_graph(4, {constant_edge(0, 1, 1, 0), constant_edge(1, 2, 1, 0), constant_edge(2, 3, 1, 0)},
                       {"A", "B", "C", "D"});
}

// Two labels reach C: (time 3, score 4) via B and (time 4, score 3) directly. The
// first dominates the second, but only the second can continue through B to D.
// Budget 6 from time 0: best is A-C-B-D with score 7; dominance pruning finds 6.
inline TDGraph dominance_counterexample() {
    return build_graph(4,
                       {constant_edge(0, 1, 1, 2), constant_edge(1, 2, 2, 2), constant_edge(0, 2, 4, 3),
                        constant_edge(2, 3, 3, 2), constant_edge(2, 1, 1, 1), constant_edge(1, 3, 1, 3)},
                       {"A", "B", "C", "D"});
}

// Static instance with (distance, time) pairs; node C receives (4,4) directly from A
// and (3,3) through B.
inline reference::StaticGraph minsum_instance() {
    return {4, {{0, 2, 4, 4}, {0, 1, 1, 1}, {1, 2, 2, 2}, {2, 3, 1, 1}}};
}

}  // namespace tdcpo::fixtures
