// Exact brute-force ground truth, the edge-recall accuracy metric and the
// accuracy-vs-time bench harness.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "knng/builder.hpp"
#include "knng/core.hpp"
#include "knng/io.hpp"

namespace knng {

/// Exact k-NN graph by exhaustive pairwise comparison, Theta(n^2 d). Ties are
/// broken by ascending id, so the result is unique.
inline KnnGraph brute_force_graph(const Dataset& dataset, std::uint32_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (k >= dataset.size())
        throw std::invalid_argument("k = " + std::to_string(k) + " requires more than " +
                                    std::to_string(dataset.size()) + " points");
    KnnGraph graph(dataset.size(), k);
    const auto n = static_cast<std::uint32_t>(dataset.size());
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const double d = dataset.distance(i, j);
            graph.list(i).try_insert({j, d});
            graph.list(j).try_insert({i, d});
        }
    }
    return graph;
}

/// Fraction of the exact graph's directed edges present in the approximate
/// graph; matching is by neighbor id only.
inline double graph_accuracy(const KnnGraph& approx, const KnnGraph& exact) {
    if (approx.size() != exact.size() || approx.k() != exact.k())
        throw std::invalid_argument("accuracy requires graphs with identical n and k");
    std::uint64_t found = 0, total = 0;
    std::vector<std::uint32_t> approx_ids, exact_ids;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const auto& ex = exact.list(i).entries();
        total += ex.size();
        if (ex.empty()) continue;
        approx_ids.clear();
        exact_ids.clear();
        for (const auto& e : approx.list(i).entries()) approx_ids.push_back(e.id);
        for (const auto& e : ex) exact_ids.push_back(e.id);
        std::sort(approx_ids.begin(), approx_ids.end());
        std::sort(exact_ids.begin(), exact_ids.end());
        std::size_t a = 0;
        for (const auto id : exact_ids) {
            while (a < approx_ids.size() && approx_ids[a] < id) ++a;
            if (a < approx_ids.size() && approx_ids[a] == id) ++found, ++a;
        }
    }
    if (total == 0) throw std::invalid_argument("exact graph has no edges");
    return static_cast<double>(found) / static_cast<double>(total);
}

struct BenchRow {
    int config_id = 0;
    int divisions = 0;           // M
    std::uint64_t budget = 0;    // T
    double trigger = 0.0;
    std::uint32_t k = 0;
    bool propagation = false;
    double seconds = 0.0;
    double accuracy = 0.0;
};

/// Exact graphs are expensive; reuse them across bench rows, optionally
/// persisted under cache_dir keyed by (dataset digest, k, metric).
class ExactGraphCache {
public:
    explicit ExactGraphCache(std::string cache_dir = "") : dir_(std::move(cache_dir)) {}

    const KnnGraph& get(const Dataset& dataset, std::uint32_t k) {
        auto it = memo_.find(k);
        if (it != memo_.end()) return it->second;
        if (!dir_.empty()) {
            const auto path = file_path(dataset, k);
            if (std::filesystem::exists(path))
                return memo_.emplace(k, load_graph(path, dataset)).first->second;
        }
        KnnGraph exact = brute_force_graph(dataset, k);
        if (!dir_.empty()) {
            std::filesystem::create_directories(dir_);
            save_graph(exact, dataset, file_path(dataset, k));
        }
        return memo_.emplace(k, std::move(exact)).first->second;
    }

private:
    std::string file_path(const Dataset& dataset, std::uint32_t k) const {
        std::ostringstream name;
        name << "exact-" << std::hex << dataset.digest() << std::dec << "-k" << k << "-"
             << to_string(dataset.metric()) << ".knng";
        return (std::filesystem::path(dir_) / name.str()).string();
    }

    std::string dir_;
    std::map<std::uint32_t, KnnGraph> memo_;
};

/// Run every config against the dataset and score it against the cached exact
/// graph. One row per config, ready for accuracy-vs-time plotting.
inline std::vector<BenchRow> bench_run(const Dataset& dataset, const std::vector<BuildConfig>& grid,
                                       const std::string& cache_dir = "") {
    ExactGraphCache exact_cache(cache_dir);
    std::vector<BenchRow> rows;
    rows.reserve(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto& cfg = grid[c];
        const auto start = std::chrono::steady_clock::now();
        auto [graph, stats] = build_graph(dataset, cfg);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        BenchRow row;
        row.config_id = static_cast<int>(c);
        row.divisions = cfg.max_divisions;
        row.budget = cfg.effective_budget();
        row.trigger = cfg.trigger_threshold;
        row.k = cfg.k;
        row.propagation = cfg.enable_propagation;
        row.seconds = seconds;
        row.accuracy = graph_accuracy(graph, exact_cache.get(dataset, cfg.k));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace knng
