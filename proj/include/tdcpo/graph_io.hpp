#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tdcpo/graph.hpp"

namespace tdcpo {

/// Syntax or schema problem in a graph document. Semantic problems (FIFO, dangling
/// endpoints, duplicates) surface as GraphError from build_graph instead.
class GraphFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw GraphFormatError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw GraphFormatError(where + ": missing \"" + key + "\"");
    return *it;
}

inline double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw GraphFormatError(where + ": expected a number");
    return v.get<double>();
}

inline std::uint64_t index(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw GraphFormatError(where + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

inline nlohmann::ordered_json edge_to_json(const TDEdge& e) {
    nlohmann::ordered_json j;
    j["from"] = e.from;
    j["to"] = e.to;
    if (e.length_m) j["length_m"] = quantize_micro(*e.length_m);
    auto arrival = nlohmann::ordered_json::array();
    for (const auto& p : e.arrival.breakpoints()) {
        arrival.push_back({quantize_micro(p.departure), quantize_micro(p.arrival)});
    }
    j["arrival"] = std::move(arrival);
    auto boundaries = nlohmann::ordered_json::array();
    for (Minutes b : e.score.boundaries()) boundaries.push_back(quantize_micro(b));
    auto values = nlohmann::ordered_json::array();
    for (double s : e.score.values()) values.push_back(quantize_micro(s));
    j["score"] = {{"boundaries", std::move(boundaries)},
                  {"values", std::move(values)},
                  {"default", quantize_micro(e.score.default_score())}};
    return j;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace detail

/// Writes one edge per line so that diffs and error line numbers stay readable.
inline void write_graph(std::ostream& out, const TDGraph& g) {
    out << "{\"node_count\":" << g.node_count();
    if (g.has_names()) out << ",\"node_names\":" << nlohmann::json(g.node_names()).dump();
    out << ",\"edges\":[";
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        out << (i ? ",\n" : "\n") << detail::edge_to_json(g.edges()[i]).dump();
    }
    out << "\n]}\n";
}

inline TDGraph graph_from_json(const nlohmann::json& doc) {
    using detail::number;
    using detail::require;
    const std::string root = "document";
    auto node_count = detail::index(require(doc, "node_count", root), "node_count");
    const auto& edges = require(doc, "edges", root);
    if (!edges.is_array()) throw GraphFormatError("edges: expected an array");

    std::vector<std::string> names;
    if (auto it = doc.find("node_names"); it != doc.end()) {
        if (!it->is_array()) throw GraphFormatError("node_names: expected an array of strings");
        for (const auto& n : *it) {
            if (!n.is_string()) throw GraphFormatError("node_names: expected an array of strings");
            names.push_back(n.get<std::string>());
        }
    }

    std::vector<EdgeSpec> specs;
    specs.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const std::string where = "edges[" + std::to_string(i) + "]";
        EdgeSpec spec;
        auto from = detail::index(require(e, "from", where), where + ".from");
        auto to = detail::index(require(e, "to", where), where + ".to");
        if (from > kInvalidNode - 1 || to > kInvalidNode - 1) throw GraphFormatError(where + ": node id too large");
        spec.from = static_cast<NodeId>(from);
        spec.to = static_cast<NodeId>(to);
        if (auto it = e.find("length_m"); it != e.end() && !it->is_null()) {
            spec.length_m = number(*it, where + ".length_m");
        }
        const auto& arrival = require(e, "arrival", where);
        if (!arrival.is_array()) throw GraphFormatError(where + ".arrival: expected an array of pairs");
        for (std::size_t k = 0; k < arrival.size(); ++k) {
            const auto& pair = arrival[k];
            const std::string pw = where + ".arrival[" + std::to_string(k) + "]";
            if (!pair.is_array() || pair.size() != 2) throw GraphFormatError(pw + ": expected [departure, arrival]");
            spec.arrival.push_back({number(pair[0], pw), number(pair[1], pw)});
        }
        const auto& score = require(e, "score", where);
        std::vector<Minutes> boundaries;
        std::vector<double> values;
        double fallback = 0.0;
        if (auto it = score.find("boundaries"); it != score.end()) {
            if (!it->is_array()) throw GraphFormatError(where + ".score.boundaries: expected an array");
            for (const auto& b : *it) boundaries.push_back(number(b, where + ".score.boundaries"));
        }
        if (auto it = score.find("values"); it != score.end()) {
            if (!it->is_array()) throw GraphFormatError(where + ".score.values: expected an array");
            for (const auto& v : *it) values.push_back(number(v, where + ".score.values"));
        }
        if (auto it = score.find("default"); it != score.end()) fallback = number(*it, where + ".score.default");
        try {
            spec.score = ScoreFunction(std::move(boundaries), std::move(values), fallback);
        } catch (const InvalidFunction& err) {
            throw GraphFormatError(where + ".score: " + err.what());
        }
        specs.push_back(std::move(spec));
    }
    return build_graph(node_count, std::move(specs), std::move(names));
}

inline TDGraph read_graph(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw GraphFormatError("parse error at line " + std::to_string(detail::line_of(text, e.byte)) + ": " +
                               e.what());
    }
    return graph_from_json(doc);
}

inline TDGraph load_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GraphFormatError("cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return read_graph(text);
    } catch (const GraphFormatError& e) {
        throw GraphFormatError(path.string() + ": " + e.what());
    }
}

inline void save_graph(const TDGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_graph(out, g);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::string graph_to_string(const TDGraph& g) {
    std::ostringstream out;
    write_graph(out, g);
    return out.str();
}

}  // namespace tdcpo
