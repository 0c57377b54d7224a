#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tdcpo/datagen.hpp"
#include "tdcpo/scope.hpp"

namespace tdcpo {

struct BenchConfig {
    std::vector<unsigned> threads{1};
    bool temporal_pruning = true;
    std::optional<std::uint64_t> max_expansions;
};

struct BenchRow {
    int set = 0;
    unsigned threads = 1;
    bool pruning = true;
    std::size_t queries = 0;
    std::size_t feasible = 0;
    std::size_t infeasible = 0;
    std::size_t exploration_limited = 0;
    double avg_score = 0.0;      // over feasible queries
    double avg_runtime_s = 0.0;  // over feasible queries
    double explored_mean = 0.0;  // over feasible queries
    double explored_p95 = 0.0;
};

inline const char* kBenchCsvHeader = "set,threads,pruning,avg_score,avg_runtime_s,infeasible,explored_mean,explored_p95";

/// Nearest-rank percentile; 0 for an empty sample.
inline double percentile(std::vector<double> values, double pct) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

struct QueryOutcome {
    SolveResult result;
    double runtime_s = 0.0;
};

/// Times solve() alone; the latest-departure traversal is part of it.
inline QueryOutcome run_query(const TDGraph& g, const QuerySpec& q, const SolveOptions& options) {
    auto ctx = q.context();
    auto start = std::chrono::steady_clock::now();
    auto result = solve(g, ctx, {}, options);
    auto stop = std::chrono::steady_clock::now();
    return {std::move(result), std::chrono::duration<double>(stop - start).count()};
}

/// One row per (query set, thread count). Queries run one after another; any
/// parallelism lives inside solve().
inline std::vector<BenchRow> run_bench(const TDGraph& g, const std::vector<QuerySpec>& queries,
                                       const BenchConfig& config) {
    std::map<int, std::vector<const QuerySpec*>> by_set;
    for (const auto& q : queries) by_set[q.set].push_back(&q);

    std::vector<BenchRow> rows;
    for (const auto& [set, members] : by_set) {
        for (unsigned threads : config.threads) {
            SolveOptions options = threads <= 1 ? SolveOptions::sequential() : SolveOptions::parallel(threads);
            options.temporal_pruning = config.temporal_pruning;
            options.max_expansions = config.max_expansions;

            BenchRow row;
            row.set = set;
            row.threads = std::max(1u, threads);
            row.pruning = config.temporal_pruning;
            row.queries = members.size();
            std::vector<double> explored;
            double score_sum = 0.0, time_sum = 0.0;
            for (const QuerySpec* q : members) {
                auto outcome = run_query(g, *q, options);
                switch (outcome.result.status) {
                    case SolveStatus::Optimal:
                        ++row.feasible;
                        score_sum += outcome.result.path->score;
                        time_sum += outcome.runtime_s;
                        explored.push_back(static_cast<double>(outcome.result.explored_labels));
                        break;
                    case SolveStatus::Infeasible: ++row.infeasible; break;
                    case SolveStatus::ExplorationLimit: ++row.exploration_limited; break;
                }
            }
            if (row.feasible) {
                row.avg_score = score_sum / static_cast<double>(row.feasible);
                row.avg_runtime_s = time_sum / static_cast<double>(row.feasible);
                double total = 0.0;
                for (double e : explored) total += e;
                row.explored_mean = total / static_cast<double>(row.feasible);
                row.explored_p95 = percentile(explored, 95.0);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << kBenchCsvHeader << '\n';
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%d,%u,%s,%.6f,%.6f,%zu,%.1f,%.1f\n", r.set, r.threads, r.pruning ? "on" : "off",
                      r.avg_score, r.avg_runtime_s, r.infeasible, r.explored_mean, r.explored_p95);
        out << line;
    }
}

}  // namespace tdcpo
