// Build configuration, per-division statistics and the pairwise update and
// leaf-subgraph primitives shared by the division and propagation phases.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "knng/core.hpp"
#include "knng/pair_cache.hpp"
#include "knng/partitioner.hpp"

namespace knng {

struct BuildConfig {
    std::uint32_t k = 10;
    int max_divisions = 20;          // M
    double trigger_threshold = 0.05; // propagation starts once r_m drops below this
    std::uint64_t propagation_budget = 0;  // T; 0 means the default 100 * k
    bool enable_propagation = true;
    DivisionConfig division;  // division.seed is the master seed of the whole build

    std::uint64_t effective_budget() const { return propagation_budget == 0 ? 100ULL * k : propagation_budget; }

    void validate() const {
        if (k < 1) throw std::invalid_argument("k must be >= 1");
        if (max_divisions < 1) throw std::invalid_argument("division count must be >= 1");
        if (trigger_threshold <= 0.0 || trigger_threshold >= 1.0)
            throw std::invalid_argument("trigger threshold must lie strictly between 0 and 1");
        if (effective_budget() < k) throw std::invalid_argument("propagation budget must be >= k");
        division.validate();
    }
};

/// Non-fatal configuration advice; the CLI surfaces these.
inline std::vector<std::string> config_warnings(const BuildConfig& cfg) {
    std::vector<std::string> warnings;
    if (cfg.division.max_leaf_size < 2ULL * cfg.k)
        warnings.push_back("leaf size " + std::to_string(cfg.division.max_leaf_size) +
                           " is below the recommended 2*k = " + std::to_string(2ULL * cfg.k) +
                           "; leaf subgraphs cannot fill the neighbor lists");
    return warnings;
}

struct DivisionRecord {
    std::uint64_t new_pairs = 0;         // cache misses during this division
    std::uint64_t cumulative_pairs = 0;  // distinct pairs cached through this division
    double effective_rate = 0.0;
    double wall_time = 0.0;  // seconds spent on this division and its leaf subgraphs
    std::uint64_t distance_computations = 0;
};

struct BuildStats {
    std::vector<DivisionRecord> divisions;
    int divisions_run = 0;
    std::optional<int> propagation_triggered_at;  // 1-based division index, if the rate fell below the threshold
    bool propagation_ran = false;
    double propagation_wall_time = 0.0;
    std::uint64_t propagation_distance_computations = 0;
    double total_wall_time = 0.0;
    std::uint64_t total_distance_computations = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
};

/// r_m = new pairs of division m / distinct pairs accumulated through m.
/// Counting distinct pairs is equivalent to the per-point neighborhood-set
/// difference ratio: each pair {p, q} contributes q to p's accumulated
/// neighborhood and p to q's, so the factor two cancels.
inline double effective_rate(const BuildStats& stats, int m) {
    if (m < 1 || m > static_cast<int>(stats.divisions.size()))
        throw std::invalid_argument("division index out of range");
    const auto& rec = stats.divisions[static_cast<std::size_t>(m - 1)];
    if (rec.cumulative_pairs == 0) return m == 1 ? 1.0 : 0.0;
    return static_cast<double>(rec.new_pairs) / static_cast<double>(rec.cumulative_pairs);
}

/// Offer v to u's list and u to v's list with their common distance.
inline std::pair<bool, bool> pairwise_update(KnnGraph& graph, std::uint32_t u, std::uint32_t v, double d) {
    const bool updated_u = graph.list(u).try_insert({v, d});
    const bool updated_v = graph.list(v).try_insert({u, d});
    return {updated_u, updated_v};
}

/// Brute-force subgraph over one leaf: route every unordered pair through the
/// cache and apply the pairwise update for fresh pairs. A pair already cached
/// was offered to both endpoint lists when it was computed, and re-offering a
/// candidate never changes a list, so known pairs are counted as hits and
/// skipped without fetching the stored value.
inline void build_leaf_subgraph(KnnGraph& graph, const Dataset& dataset,
                                std::span<const std::uint32_t> leaf, PairCache& cache) {
    constexpr std::size_t kPrefetchAhead = 8;
    for (std::size_t a = 0; a + 1 < leaf.size(); ++a) {
        const std::uint32_t u = leaf[a];
        const std::size_t prefetch_now = std::min(leaf.size(), a + 1 + kPrefetchAhead);
        for (std::size_t b = a + 1; b < prefetch_now; ++b) cache.prefetch(u, leaf[b]);
        for (std::size_t b = a + 1; b < leaf.size(); ++b) {
            if (b + kPrefetchAhead < leaf.size()) cache.prefetch(u, leaf[b + kPrefetchAhead]);
            const std::uint32_t v = leaf[b];
            if (cache.note_if_known(u, v)) continue;
            const double d = dataset.distance(u, v);
            cache.insert_new(u, v, d);
            pairwise_update(graph, u, v, d);
        }
    }
}

}  // namespace knng
