// Build orchestration: run successive random divisions, unite their leaf
// subgraphs into one graph, track the effective rate of each division and
// hand over to neighborhood propagation once fresh divisions stop paying.
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <utility>

#include "knng/builder_types.hpp"
#include "knng/core.hpp"
#include "knng/pair_cache.hpp"
#include "knng/partitioner.hpp"
#include "knng/propagation.hpp"
#include "knng/rng.hpp"

namespace knng {

/// Observer invoked after each completed division with the live graph and the
/// stats so far; used by the bench harness to snapshot accuracy over time.
using DivisionObserver = std::function<void(int division, const KnnGraph&, const BuildStats&)>;

namespace detail {
inline double seconds_between(std::chrono::steady_clock::time_point a,
                              std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}
}  // namespace detail

/// Construct an approximate k-NN graph. For m = 1..M: draw an independent
/// random division (seeded from the master seed and m) and build brute-force
/// subgraphs inside its leaves, all through the shared pair cache. After each
/// division m >= 2 the effective rate r_m is evaluated; once it falls below
/// the trigger threshold no further divisions run and propagation (when
/// enabled) finishes the graph. Deterministic given cfg.division.seed.
inline std::pair<KnnGraph, BuildStats> build_graph(const Dataset& dataset, const BuildConfig& cfg,
                                                   const DivisionObserver& observer = {}) {
    using Clock = std::chrono::steady_clock;
    cfg.validate();

    KnnGraph graph(dataset.size(), cfg.k);
    BuildStats stats;
    const std::size_t leaf_pairs_bound =
        dataset.size() * (std::min<std::size_t>(cfg.division.max_leaf_size, dataset.size()) / 2 + 1);
    PairCache cache(leaf_pairs_bound);

    const auto build_start = Clock::now();
    for (int m = 1; m <= cfg.max_divisions; ++m) {
        const auto division_start = Clock::now();
        const std::uint64_t misses_before = cache.misses();
        const std::uint64_t kernel_before = dataset.distance_evaluations();

        Rng rng(rnd::substream_seed(cfg.division.seed, static_cast<std::uint64_t>(m)));
        const Division division = random_division(dataset, cfg.division, rng);
        for (const auto& leaf : division.leaves) build_leaf_subgraph(graph, dataset, leaf, cache);

        DivisionRecord rec;
        rec.new_pairs = cache.misses() - misses_before;
        rec.cumulative_pairs = cache.size();
        rec.distance_computations = dataset.distance_evaluations() - kernel_before;
        rec.wall_time = detail::seconds_between(division_start, Clock::now());
        stats.divisions.push_back(rec);
        stats.divisions_run = m;
        stats.divisions.back().effective_rate = effective_rate(stats, m);

        if (observer) observer(m, graph, stats);

        if (m >= 2 && cfg.enable_propagation &&
            stats.divisions.back().effective_rate < cfg.trigger_threshold) {
            stats.propagation_triggered_at = m;
            break;
        }
    }

    if (cfg.enable_propagation) {
        const auto propagation_start = Clock::now();
        const std::uint64_t kernel_before = dataset.distance_evaluations();
        propagate_all(graph, dataset, cfg.effective_budget(), cache);
        stats.propagation_ran = true;
        stats.propagation_distance_computations = dataset.distance_evaluations() - kernel_before;
        stats.propagation_wall_time = detail::seconds_between(propagation_start, Clock::now());
    }

    stats.total_wall_time = detail::seconds_between(build_start, Clock::now());
    for (const auto& rec : stats.divisions) stats.total_distance_computations += rec.distance_computations;
    stats.total_distance_computations += stats.propagation_distance_computations;
    stats.cache_hits = cache.hits();
    stats.cache_misses = cache.misses();
    return {std::move(graph), std::move(stats)};
}

}  // namespace knng
