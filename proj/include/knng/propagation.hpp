// Best-first neighborhood propagation: expand each point through its current
// neighbors' neighbors under a visit budget, upgrading its list on the way.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "knng/builder_types.hpp"
#include "knng/core.hpp"
#include "knng/pair_cache.hpp"

namespace knng {

/// Reusable per-point working state for propagation.
struct PropagationScratch {
    std::vector<std::uint32_t> stamp;
    std::uint32_t epoch = 0;
    std::vector<Neighbor> heap;

    void reset(std::size_t n) {
        if (stamp.size() != n) {
            stamp.assign(n, 0);
            epoch = 0;
        }
        if (++epoch == 0) {  // stamp wrap-around
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
        heap.clear();
    }
};

namespace detail {
inline bool heap_after(const Neighbor& a, const Neighbor& b) {
    return neighbor_less(b, a);  // min-heap on (dist, id)
}
}  // namespace detail

/// Expand point p in best-first order. Seeds a min-priority queue with p's
/// current neighbors; repeatedly pops the nearest candidate q and offers every
/// unvisited entry of q's live adjacency list to p (and p to it, pairwise).
/// Stops when the queue empties or T distinct points have had their distance
/// to p evaluated (seed neighbors count toward T). Returns the visited count.
inline std::size_t propagate_point(KnnGraph& graph, const Dataset& dataset, std::uint32_t p,
                                   std::uint64_t budget, PairCache& cache, PropagationScratch& scratch) {
    scratch.reset(graph.size());
    auto& stamp = scratch.stamp;
    auto& heap = scratch.heap;
    const std::uint32_t epoch = scratch.epoch;

    stamp[p] = epoch;
    for (const auto& seed : graph.list(p).entries()) {
        stamp[seed.id] = epoch;
        heap.push_back(seed);
    }
    std::make_heap(heap.begin(), heap.end(), detail::heap_after);
    std::uint64_t visited = heap.size();

    while (!heap.empty() && visited < budget) {
        std::pop_heap(heap.begin(), heap.end(), detail::heap_after);
        const std::uint32_t q = heap.back().id;
        heap.pop_back();

        const auto& adjacency = graph.list(q).entries();
        for (const auto& entry : adjacency)
            if (stamp[entry.id] != epoch) cache.prefetch(p, entry.id);
        for (const auto& entry : adjacency) {
            const std::uint32_t r = entry.id;
            if (stamp[r] == epoch || r == p) continue;
            const double d = cached_distance(cache, dataset, p, r);
            stamp[r] = epoch;
            ++visited;
            pairwise_update(graph, p, r, d);
            heap.push_back({r, d});
            std::push_heap(heap.begin(), heap.end(), detail::heap_after);
            if (visited >= budget) break;
        }
    }
    return visited;
}

inline std::size_t propagate_point(KnnGraph& graph, const Dataset& dataset, std::uint32_t p,
                                   std::uint64_t budget, PairCache& cache) {
    PropagationScratch scratch;
    return propagate_point(graph, dataset, p, budget, cache, scratch);
}

/// Run propagate_point for every point in ascending id order against the
/// continuously updated graph.
inline void propagate_all(KnnGraph& graph, const Dataset& dataset, std::uint64_t budget, PairCache& cache) {
    PropagationScratch scratch;
    for (std::uint32_t p = 0; p < graph.size(); ++p)
        propagate_point(graph, dataset, p, budget, cache, scratch);
}

}  // namespace knng
