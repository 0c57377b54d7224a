#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>
#include <tbb/global_control.h>
#include <tbb/task_arena.h>
#include <tbb/task_group.h>

#include "tdcpo/graph.hpp"
#include "tdcpo/search.hpp"

namespace tdcpo {

/// Search state: a node reached at `arrival` with `score` accumulated along the
/// predecessor chain.
struct Label {
    NodeId node = 0;
    Minutes arrival = 0.0;
    double score = 0.0;
    std::vector<double> extra_costs;
    const Label* predecessor = nullptr;
};

/// A secondary path metric accumulated per edge (evaluated at the departure time
/// from the edge's tail) that must stay within `budget`.
struct Constraint {
    std::string name;
    std::function<double(const TDEdge&, Minutes departure)> edge_cost;
    double budget = 0.0;
};

using ConstraintSpec = std::vector<Constraint>;

/// Caps the total edge length of the path; edges without a length count as zero.
inline Constraint length_constraint(double budget_m) {
    return {"length_m", [](const TDEdge& e, Minutes) { return e.length_m.value_or(0.0); }, budget_m};
}

inline void validate_constraints(const ConstraintSpec& constraints) {
    for (const auto& c : constraints) {
        if (!c.edge_cost) throw std::invalid_argument("constraint '" + c.name + "' has no cost accessor");
        if (!(c.budget > 0.0)) throw std::invalid_argument("constraint '" + c.name + "' needs a positive budget");
    }
}

class VisitedSet {
public:
    VisitedSet() = default;
    explicit VisitedSet(std::size_t node_count) : bits_(node_count, 0) {}

    bool contains(NodeId v) const { return bits_[v] != 0; }
    void insert(NodeId v) { bits_[v] = 1; }
    void erase(NodeId v) { bits_[v] = 0; }
    std::size_t size() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

private:
    std::vector<std::uint8_t> bits_;
};

/// A loopless path with the arrival time at each of its nodes; arrivals.front() is the
/// departure from the source. Edge i departs at arrivals[i] and arrives at arrivals[i + 1].
struct SolutionPath {
    std::vector<NodeId> nodes;
    std::vector<Minutes> arrivals;
    double score = 0.0;
    std::vector<double> extra_costs;

    Minutes departure() const { return arrivals.front(); }
    Minutes arrival() const { return arrivals.back(); }
    Minutes travel_time() const { return arrivals.back() - arrivals.front(); }
    std::size_t edge_count() const { return nodes.size() - 1; }

    friend bool operator==(const SolutionPath&, const SolutionPath&) = default;
};

/// Result order: higher score, then earlier arrival, then lexicographically smaller node
/// sequence. Total on distinct paths, so the winner never depends on exploration order.
inline bool better_path(const SolutionPath& a, const SolutionPath& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.arrival() != b.arrival()) return a.arrival() < b.arrival();
    return a.nodes < b.nodes;
}

class PathConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Rebuilds the path ending at `destination` from its predecessor chain and replays it
/// forward through the graph; every stored label must match the replay.
inline SolutionPath reconstruct_path(const Label& destination, const TDGraph& g,
                                     const ConstraintSpec& constraints = {}) {
    std::vector<const Label*> chain;
    std::unordered_set<NodeId> seen;
    for (const Label* l = &destination; l; l = l->predecessor) {
        if (!seen.insert(l->node).second) {
            throw PathConsistencyError("label chain revisits node " + g.node_label(l->node));
        }
        if (l->node >= g.node_count()) throw PathConsistencyError("label chain leaves the graph");
        chain.push_back(l);
    }
    std::reverse(chain.begin(), chain.end());

    SolutionPath path;
    path.nodes.reserve(chain.size());
    path.arrivals.reserve(chain.size());
    path.nodes.push_back(chain.front()->node);
    path.arrivals.push_back(chain.front()->arrival);
    double score = chain.front()->score;
    std::vector<double> extras = chain.front()->extra_costs;
    extras.resize(constraints.size(), 0.0);

    for (std::size_t i = 1; i < chain.size(); ++i) {
        const Label& prev = *chain[i - 1];
        const Label& cur = *chain[i];
        auto e = g.find_edge(prev.node, cur.node);
        if (!e) {
            throw PathConsistencyError("no edge " + g.node_label(prev.node) + " -> " + g.node_label(cur.node));
        }
        const auto& edge = g.edge(*e);
        Minutes at = edge.arrival.arrival(prev.arrival);
        score += edge.score.at(prev.arrival);
        for (std::size_t c = 0; c < constraints.size(); ++c) extras[c] += constraints[c].edge_cost(edge, prev.arrival);
        if (std::abs(at - cur.arrival) > kTimeTolerance || std::abs(score - cur.score) > 1e-9) {
            throw PathConsistencyError("label at " + g.node_label(cur.node) + " disagrees with forward replay");
        }
        path.nodes.push_back(cur.node);
        path.arrivals.push_back(cur.arrival);
    }
    path.score = destination.score;
    path.extra_costs = std::move(extras);
    return path;
}

enum class ExecutionMode { Sequential, Parallel };

struct SolveOptions {
    ExecutionMode mode = ExecutionMode::Sequential;
    unsigned threads = 1;
    bool temporal_pruning = true;
    // abort with ExplorationLimit once more labels than this have been created
    std::optional<std::uint64_t> max_expansions;
    // children are spawned as tasks only above this recursion depth
    std::optional<unsigned> fork_depth;

    static SolveOptions sequential() { return {}; }
    static SolveOptions parallel(unsigned threads) {
        SolveOptions o;
        o.mode = ExecutionMode::Parallel;
        o.threads = std::max(1u, threads);
        return o;
    }

    unsigned effective_fork_depth() const {
        if (fork_depth) return *fork_depth;
        unsigned log2_threads = static_cast<unsigned>(std::bit_width(std::max(1u, threads))) - 1;
        return 2 * log2_threads + 4;
    }
};

enum class SolveStatus { Optimal, Infeasible, ExplorationLimit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::ExplorationLimit: return "exploration_limit";
    }
    return "unknown";
}

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    std::optional<SolutionPath> path;
    std::uint64_t explored_labels = 0;
};

namespace detail {

struct Frame {
    NodeId node;
    Minutes arrival;
    double score;
};

struct SearchShared {
    const TDGraph& graph;
    NodeId destination;
    Minutes t_arr;
    std::span<const Minutes> boundary;
    const ConstraintSpec& constraints;
    std::optional<std::uint64_t> cap;
    unsigned fork_depth = 0;
    bool parallel = false;
    std::atomic<std::uint64_t> explored{0};
    std::atomic<bool> stop{false};
};

/// Depth-first walker over loopless label chains. Holds the current chain as a stack
/// of frames with a backtracking visited set; in parallel mode it forks copies of
/// itself for all but the last admissible child of shallow labels.
class Walker {
public:
    Walker(SearchShared& shared, std::size_t node_count) : sh_(&shared), visited_(node_count) {}

    void push(const Frame& f, std::span<const double> extras) {
        path_.push_back(f);
        extras_.insert(extras_.end(), extras.begin(), extras.end());
        visited_.insert(f.node);
    }

    void mark_visited(NodeId v) { visited_.insert(v); }

    void pop() {
        visited_.erase(path_.back().node);
        path_.pop_back();
        extras_.resize(path_.size() * sh_->constraints.size());
    }

    void count() {
        ++local_explored_;
        if (sh_->cap && sh_->explored.load(std::memory_order_relaxed) + local_explored_ > *sh_->cap) {
            sh_->stop.store(true, std::memory_order_relaxed);
        }
        if (sh_->parallel && local_explored_ >= 4096) flush();
    }

    void flush() {
        sh_->explored.fetch_add(local_explored_, std::memory_order_relaxed);
        local_explored_ = 0;
    }

    /// Explores every descendant of the top frame (one ProcessLabel call).
    void expand() {
        if (sh_->stop.load(std::memory_order_relaxed)) return;
        const Frame cur = path_.back();
        if (cur.node == sh_->destination) {
            offer();
            return;
        }
        if (sh_->parallel && path_.size() - 1 < sh_->fork_depth) {
            fork_children(cur);
            return;
        }
        const std::size_t k = sh_->constraints.size();
        for (EdgeId e : sh_->graph.out_edges(cur.node)) {
            Frame child;
            if (!admit(e, cur, child)) continue;
            path_.push_back(child);
            if (k) extras_.insert(extras_.end(), scratch_.begin(), scratch_.end());
            visited_.insert(child.node);
            count();
            expand();
            pop();
            if (sh_->stop.load(std::memory_order_relaxed)) return;
        }
    }

    std::optional<SolutionPath>& best() { return best_; }

private:
    /// Child-generation rule of ProcessLabel: unvisited head, arrival within the head's
    /// latest departure boundary (and the deadline at the destination), secondary
    /// budgets respected. On success the child's extra costs are left in scratch_.
    bool admit(EdgeId e, const Frame& cur, Frame& child) {
        const auto& edge = sh_->graph.edge(e);
        const NodeId v = edge.to;
        if (visited_.contains(v)) return false;
        const Minutes at = edge.arrival.arrival(cur.arrival);
        if (!time_leq(at, sh_->boundary[v])) return false;
        if (v == sh_->destination && !time_leq(at, sh_->t_arr)) return false;
        const std::size_t k = sh_->constraints.size();
        if (k) {
            scratch_.resize(k);
            const double* parent = extras_.data() + (path_.size() - 1) * k;
            for (std::size_t c = 0; c < k; ++c) {
                scratch_[c] = parent[c] + sh_->constraints[c].edge_cost(edge, cur.arrival);
                if (scratch_[c] > sh_->constraints[c].budget + 1e-9) return false;
            }
        }
        child = {v, at, cur.score + edge.score.at(cur.arrival)};
        return true;
    }

    bool beats_best() const {
        if (!best_) return true;
        const Frame& last = path_.back();
        if (last.score != best_->score) return last.score > best_->score;
        if (last.arrival != best_->arrival()) return last.arrival < best_->arrival();
        const auto& other = best_->nodes;
        for (std::size_t i = 0; i < path_.size() && i < other.size(); ++i) {
            if (path_[i].node != other[i]) return path_[i].node < other[i];
        }
        return path_.size() < other.size();
    }

    void offer() {
        if (!beats_best()) return;
        SolutionPath p;
        p.nodes.reserve(path_.size());
        p.arrivals.reserve(path_.size());
        for (const auto& f : path_) {
            p.nodes.push_back(f.node);
            p.arrivals.push_back(f.arrival);
        }
        p.score = path_.back().score;
        const std::size_t k = sh_->constraints.size();
        p.extra_costs.assign(extras_.end() - static_cast<std::ptrdiff_t>(k), extras_.end());
        best_ = std::move(p);
    }

    void merge(Walker& other) {
        other.flush();
        if (other.best_ && (!best_ || better_path(*other.best_, *best_))) best_ = std::move(other.best_);
    }

    void fork_children(const Frame& cur) {
        struct Child {
            Frame frame;
            std::vector<double> extras;
        };
        std::vector<Child> children;
        for (EdgeId e : sh_->graph.out_edges(cur.node)) {
            Frame child;
            if (admit(e, cur, child)) children.push_back({child, sh_->constraints.empty() ? std::vector<double>{} : scratch_});
        }
        if (children.empty()) return;

        std::vector<Walker> forks;
        forks.reserve(children.size() - 1);
        tbb::task_group group;
        for (std::size_t i = 0; i + 1 < children.size(); ++i) {
            // copy of the visited list for every child but the last
            Walker& w = forks.emplace_back(Walker(*sh_, path_, extras_, visited_));
            w.push(children[i].frame, children[i].extras);
            w.count();
            group.run([&w] { w.expand(); });
        }
        // last child reuses this walker's visited list
        push(children.back().frame, children.back().extras);
        count();
        expand();
        pop();
        group.wait();
        for (auto& w : forks) merge(w);
    }

    Walker(SearchShared& shared, const std::vector<Frame>& path, const std::vector<double>& extras,
           const VisitedSet& visited)
        : sh_(&shared), path_(path), extras_(extras), visited_(visited) {}

    SearchShared* sh_;
    std::vector<Frame> path_;
    std::vector<double> extras_;  // path_.size() * constraints.size(), row per frame
    std::vector<double> scratch_;
    VisitedSet visited_;
    std::uint64_t local_explored_ = 0;
    std::optional<SolutionPath> best_;
};

inline std::vector<Label> relink(const std::vector<Label>& chain) {
    std::vector<Label> out = chain;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].predecessor = i ? &out[i - 1] : nullptr;
    return out;
}

}  // namespace detail

/// SCOPE search engine for one query: generates children of labels and recursively
/// explores all loopless continuations that respect the latest departure boundaries.
class ScopeSearch {
public:
    ScopeSearch(const TDGraph& g, const QueryContext& query, const LatestDepartureMap& boundaries,
                const ConstraintSpec& constraints = {})
        : graph_(&g), query_(query), boundaries_(boundaries), constraints_(constraints) {
        if (boundaries.size() != g.node_count()) throw std::invalid_argument("boundary map does not match graph");
    }

    /// Labels created from `label` by one expansion step (children of one ProcessLabel call).
    std::vector<Label> children(const Label& label, const VisitedSet& visited) const {
        std::vector<Label> out;
        const std::size_t k = constraints_.size();
        for (EdgeId e : graph_->out_edges(label.node)) {
            const auto& edge = graph_->edge(e);
            const NodeId v = edge.to;
            if (visited.contains(v)) continue;
            const Minutes at = edge.arrival.arrival(label.arrival);
            if (!time_leq(at, boundaries_.boundary(v))) continue;
            if (v == query_.destination && !time_leq(at, query_.t_arr())) continue;
            std::vector<double> extras(k, 0.0);
            bool within = true;
            for (std::size_t c = 0; c < k; ++c) {
                double base = c < label.extra_costs.size() ? label.extra_costs[c] : 0.0;
                extras[c] = base + constraints_[c].edge_cost(edge, label.arrival);
                within = within && extras[c] <= constraints_[c].budget + 1e-9;
            }
            if (!within) continue;
            out.push_back({v, at, label.score + edge.score.at(label.arrival), std::move(extras), &label});
        }
        return out;
    }

    /// Best destination label reachable from `label` (whose predecessor chain is the
    /// prefix already travelled), as a reconstructed path. `visited` must hold exactly
    /// the chain's nodes.
    SolveResult process_label(const Label& label, const VisitedSet& visited,
                              const SolveOptions& options = SolveOptions::sequential()) const {
        std::vector<Label> chain;
        for (const Label* l = &label; l; l = l->predecessor) chain.push_back(*l);
        std::reverse(chain.begin(), chain.end());
        return run(chain, visited, options);
    }

private:
    friend SolveResult solve_with_boundaries(const TDGraph&, const QueryContext&, const ConstraintSpec&,
                                             const SolveOptions&, const LatestDepartureMap&);

    SolveResult run(const std::vector<Label>& chain, const VisitedSet& visited, const SolveOptions& options) const {
        const std::size_t k = constraints_.size();
        detail::SearchShared shared{*graph_,
                                    query_.destination,
                                    query_.t_arr(),
                                    boundaries_.boundaries(),
                                    constraints_,
                                    options.max_expansions,
                                    options.effective_fork_depth(),
                                    options.mode == ExecutionMode::Parallel};
        detail::Walker root(shared, graph_->node_count());
        for (std::size_t i = 0; i < chain.size(); ++i) {
            std::vector<double> extras(k, 0.0);
            for (std::size_t c = 0; c < k && c < chain[i].extra_costs.size(); ++c) extras[c] = chain[i].extra_costs[c];
            root.push({chain[i].node, chain[i].arrival, chain[i].score}, extras);
        }
        for (NodeId v = 0; v < graph_->node_count(); ++v) {
            if (visited.contains(v)) root.mark_visited(v);
        }
        root.count();

        if (options.mode == ExecutionMode::Parallel) {
            // without this, TBB caps its worker pool at the hardware concurrency
            tbb::global_control workers(tbb::global_control::max_allowed_parallelism, options.threads);
            tbb::task_arena arena(static_cast<int>(options.threads));
            arena.execute([&] { root.expand(); });
        } else {
            root.expand();
        }
        root.flush();

        SolveResult result;
        result.explored_labels = shared.explored.load();
        if (shared.stop.load()) {
            result.status = SolveStatus::ExplorationLimit;
            return result;
        }
        if (!root.best()) {
            result.status = SolveStatus::Infeasible;
            return result;
        }
        result.status = SolveStatus::Optimal;
        result.path = validate(*root.best());
        return result;
    }

    // Replays the winning path through reconstruct_path as a solver self-check.
    SolutionPath validate(const SolutionPath& p) const {
        std::vector<Label> chain;
        chain.reserve(p.nodes.size());
        double score = 0.0;
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
            if (i) score += graph_->edge(*graph_->find_edge(p.nodes[i - 1], p.nodes[i])).score.at(p.arrivals[i - 1]);
            chain.push_back({p.nodes[i], p.arrivals[i], i + 1 == p.nodes.size() ? p.score : score, {}, nullptr});
        }
        auto linked = detail::relink(chain);
        return reconstruct_path(linked.back(), *graph_, constraints_);
    }

    const TDGraph* graph_;
    QueryContext query_;
    LatestDepartureMap boundaries_;
    ConstraintSpec constraints_;
};

/// Runs the search against a caller-supplied boundary map.
inline SolveResult solve_with_boundaries(const TDGraph& g, const QueryContext& query, const ConstraintSpec& constraints,
                                         const SolveOptions& options, const LatestDepartureMap& boundaries) {
    validate_query(g, query);
    validate_constraints(constraints);
    if (!time_leq(query.t_dep, boundaries.boundary(query.source))) return {SolveStatus::Infeasible, std::nullopt, 0};
    ScopeSearch search(g, query, boundaries, constraints);
    Label source{query.source, query.t_dep, 0.0, std::vector<double>(constraints.size(), 0.0), nullptr};
    VisitedSet visited(g.node_count());
    visited.insert(query.source);
    return search.run({source}, visited, options);
}

/// Maximum-score loopless path from source to destination arriving by t_dep + budget.
/// The latest departure boundaries are computed first; a source boundary before the
/// departure time means no feasible path exists.
inline SolveResult solve(const TDGraph& g, const QueryContext& query, const ConstraintSpec& constraints = {},
                         const SolveOptions& options = SolveOptions::sequential()) {
    validate_query(g, query);
    auto boundaries = options.temporal_pruning ? backward_traversal(g, query.destination, query.t_arr(), query.t_dep)
                                               : LatestDepartureMap::unbounded(g.node_count());
    return solve_with_boundaries(g, query, constraints, options, boundaries);
}

inline nlohmann::ordered_json to_json(const SolutionPath& p, const TDGraph* names = nullptr) {
    nlohmann::ordered_json j;
    auto nodes = nlohmann::ordered_json::array();
    for (NodeId v : p.nodes) {
        if (names) nodes.push_back(names->node_label(v));
        else nodes.push_back(v);
    }
    j["nodes"] = std::move(nodes);
    j["arrivals"] = p.arrivals;
    j["score"] = p.score;
    j["travel_time"] = p.travel_time();
    if (!p.extra_costs.empty()) j["extra_costs"] = p.extra_costs;
    return j;
}

inline nlohmann::ordered_json to_json(const SolveResult& r, const TDGraph* names = nullptr) {
    nlohmann::ordered_json j;
    j["status"] = to_string(r.status);
    if (r.path) j["path"] = to_json(*r.path, names);
    j["explored_labels"] = r.explored_labels;
    return j;
}

}  // namespace tdcpo
