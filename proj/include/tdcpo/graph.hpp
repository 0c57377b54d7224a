#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tdcpo/piecewise.hpp"
#include "tdcpo/types.hpp"

namespace tdcpo {

struct TDEdge {
    NodeId from = 0;
    NodeId to = 0;
    ArrivalTimeFunction arrival;
    ScoreFunction score;
    std::optional<double> length_m;

    friend bool operator==(const TDEdge&, const TDEdge&) = default;
};

/// Unvalidated edge description handed to build_graph.
struct EdgeSpec {
    NodeId from = 0;
    NodeId to = 0;
    std::vector<Breakpoint> arrival;
    ScoreFunction score;
    std::optional<double> length_m;
};

enum class GraphErrorKind {
    DanglingEndpoint,
    SelfLoop,
    DuplicateEdge,
    FifoViolation,
    InvalidArrivalFunction,
    InvalidNames,
};

class GraphError : public std::runtime_error {
public:
    GraphError(GraphErrorKind kind, std::optional<std::size_t> edge, const std::string& message)
        : std::runtime_error(edge ? "edge " + std::to_string(*edge) + ": " + message : message),
          kind_(kind),
          edge_(edge) {}

    GraphErrorKind kind() const noexcept { return kind_; }
    std::optional<std::size_t> edge() const noexcept { return edge_; }

private:
    GraphErrorKind kind_;
    std::optional<std::size_t> edge_;
};

class TDGraph;
TDGraph build_graph(std::size_t node_count, std::vector<EdgeSpec> edges, std::vector<std::string> names = {});

/// Immutable time-dependent graph with CSR out- and in-adjacency over edge indices.
class TDGraph {
public:
    TDGraph() = default;

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::span<const TDEdge> edges() const noexcept { return edges_; }
    const TDEdge& edge(EdgeId id) const { return edges_[id]; }

    std::span<const EdgeId> out_edges(NodeId v) const {
        return {out_index_.data() + out_offset_[v], out_index_.data() + out_offset_[v + 1]};
    }
    std::span<const EdgeId> in_edges(NodeId v) const {
        return {in_index_.data() + in_offset_[v], in_index_.data() + in_offset_[v + 1]};
    }

    std::optional<EdgeId> find_edge(NodeId from, NodeId to) const {
        if (from >= node_count_) return std::nullopt;
        for (EdgeId e : out_edges(from)) {
            if (edges_[e].to == to) return e;
        }
        return std::nullopt;
    }

    const std::vector<std::string>& node_names() const noexcept { return names_; }
    bool has_names() const noexcept { return !names_.empty(); }

    std::string node_label(NodeId v) const { return names_.empty() ? std::to_string(v) : names_[v]; }

    /// Resolves an external label: a declared node name first, then a decimal id.
    std::optional<NodeId> resolve_node(std::string_view label) const {
        if (auto it = name_index_.find(std::string(label)); it != name_index_.end()) return it->second;
        if (label.empty()) return std::nullopt;
        std::size_t value = 0;
        for (char c : label) {
            if (c < '0' || c > '9') return std::nullopt;
            value = value * 10 + static_cast<std::size_t>(c - '0');
            if (value >= node_count_) return std::nullopt;
        }
        return static_cast<NodeId>(value);
    }

    friend bool operator==(const TDGraph& a, const TDGraph& b) {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ && a.names_ == b.names_;
    }

private:
    friend TDGraph build_graph(std::size_t, std::vector<EdgeSpec>, std::vector<std::string>);

    std::size_t node_count_ = 0;
    std::vector<TDEdge> edges_;
    std::vector<std::size_t> out_offset_{0};
    std::vector<EdgeId> out_index_;
    std::vector<std::size_t> in_offset_{0};
    std::vector<EdgeId> in_index_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> name_index_;
};

inline TDGraph build_graph(std::size_t node_count, std::vector<EdgeSpec> edges, std::vector<std::string> names) {
    TDGraph g;
    g.node_count_ = node_count;
    g.edges_.reserve(edges.size());

    std::unordered_map<std::uint64_t, std::size_t> seen;
    seen.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto& spec = edges[i];
        if (spec.from >= node_count || spec.to >= node_count) {
            throw GraphError(GraphErrorKind::DanglingEndpoint, i,
                             "endpoint " + std::to_string(std::max(spec.from, spec.to)) + " outside a " +
                                 std::to_string(node_count) + "-node graph");
        }
        if (spec.from == spec.to) {
            throw GraphError(GraphErrorKind::SelfLoop, i, "self-loop on node " + std::to_string(spec.from));
        }
        auto key = (static_cast<std::uint64_t>(spec.from) << 32) | spec.to;
        if (auto [it, inserted] = seen.emplace(key, i); !inserted) {
            throw GraphError(GraphErrorKind::DuplicateEdge, i,
                             "duplicates edge " + std::to_string(it->second) + " (" + std::to_string(spec.from) +
                                 " -> " + std::to_string(spec.to) + ")");
        }
        if (spec.arrival.empty()) {
            throw GraphError(GraphErrorKind::InvalidArrivalFunction, i, "arrival function has no breakpoints");
        }
        if (auto violation = validate_fifo(spec.arrival)) {
            throw GraphError(GraphErrorKind::FifoViolation, i, "FIFO violation: " + violation->describe());
        }
        try {
            g.edges_.push_back(TDEdge{spec.from, spec.to, ArrivalTimeFunction(std::move(spec.arrival)),
                                      std::move(spec.score), spec.length_m});
        } catch (const InvalidFunction& e) {
            throw GraphError(GraphErrorKind::InvalidArrivalFunction, i, e.what());
        }
    }

    auto fill = [&](auto endpoint, std::vector<std::size_t>& offset, std::vector<EdgeId>& index) {
        offset.assign(node_count + 1, 0);
        for (const auto& e : g.edges_) ++offset[endpoint(e) + 1];
        for (std::size_t v = 0; v < node_count; ++v) offset[v + 1] += offset[v];
        index.resize(g.edges_.size());
        auto cursor = offset;
        for (EdgeId id = 0; id < g.edges_.size(); ++id) index[cursor[endpoint(g.edges_[id])]++] = id;
    };
    fill([](const TDEdge& e) { return e.from; }, g.out_offset_, g.out_index_);
    fill([](const TDEdge& e) { return e.to; }, g.in_offset_, g.in_index_);

    if (!names.empty()) {
        if (names.size() != node_count) {
            throw GraphError(GraphErrorKind::InvalidNames, std::nullopt,
                             "expected " + std::to_string(node_count) + " node names, got " +
                                 std::to_string(names.size()));
        }
        for (NodeId v = 0; v < names.size(); ++v) {
            if (names[v].empty() || !g.name_index_.emplace(names[v], v).second) {
                throw GraphError(GraphErrorKind::InvalidNames, std::nullopt,
                                 "node name '" + names[v] + "' is empty or repeated");
            }
        }
        g.names_ = std::move(names);
    }
    return g;
}

}  // namespace tdcpo
