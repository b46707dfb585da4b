// Cache of computed pair distances. Open-addressing table with inline values:
// one cache line per probe, calloc-backed so unused capacity never gets
// touched. Key 0 doubles as the empty marker (a real packed pair always has
// max id >= 1 in the low word).
#pragma once

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <stdexcept>

#include "knng/core.hpp"
#include "knng/rng.hpp"

namespace knng {

class PairCache {
public:
    explicit PairCache(std::size_t expected_pairs = 1024) { allocate(capacity_for(expected_pairs)); }

    PairCache(const PairCache&) = delete;
    PairCache& operator=(const PairCache&) = delete;

    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }
    std::size_t size() const { return count_; }

    /// Value for {i, j} if this pair was computed before; counts a hit.
    std::optional<double> find(std::uint32_t i, std::uint32_t j) {
        const Slot* slot = probe(pack(i, j));
        if (slot->key == 0) return std::nullopt;
        ++hits_;
        return slot->value;
    }

    /// Presence probe counted as a hit when the pair is known. Callers that
    /// only need to know whether the work was already done use this instead
    /// of find() and skip the value load.
    bool note_if_known(std::uint32_t i, std::uint32_t j) {
        if (probe(pack(i, j))->key == 0) return false;
        ++hits_;
        return true;
    }

    /// Record a freshly computed pair; counts a miss. The pair must not be
    /// present yet.
    void insert_new(std::uint32_t i, std::uint32_t j, double value) {
        if (count_ * 2 >= capacity_) grow();
        const std::uint64_t key = pack(i, j);
        Slot* slot = probe(key);
        if (slot->key != 0) throw std::logic_error("pair inserted twice into the cache");
        slot->key = key;
        slot->value = value;
        ++count_;
        ++misses_;
    }

    void prefetch(std::uint32_t i, std::uint32_t j) const {
        __builtin_prefetch(&slots_[rnd::splitmix64(pack(i, j)) & mask_]);
    }

private:
    struct Slot {
        std::uint64_t key;
        double value;
    };

    static std::uint64_t pack(std::uint32_t i, std::uint32_t j) {
        if (i == j) throw std::invalid_argument("pair cache requires two distinct points");
        const std::uint64_t lo = i < j ? i : j;
        const std::uint64_t hi = i < j ? j : i;
        return (lo << 32) | hi;
    }

    static std::size_t capacity_for(std::size_t pairs) {
        std::size_t cap = 1024;
        while (cap < pairs * 2) cap <<= 1;
        return cap;
    }

    void allocate(std::size_t capacity) {
        slots_.reset(static_cast<Slot*>(std::calloc(capacity, sizeof(Slot))));
        if (!slots_) throw std::bad_alloc();
        capacity_ = capacity;
        mask_ = capacity - 1;
    }

    Slot* probe(std::uint64_t key) const {
        std::size_t pos = rnd::splitmix64(key) & mask_;
        while (slots_[pos].key != 0 && slots_[pos].key != key) pos = (pos + 1) & mask_;
        return &slots_[pos];
    }

    void grow() {
        auto old = std::move(slots_);
        const std::size_t old_capacity = capacity_;
        allocate(capacity_ * 2);
        for (std::size_t t = 0; t < old_capacity; ++t) {
            if (old[t].key == 0) continue;
            Slot* slot = probe(old[t].key);
            *slot = old[t];
        }
    }

    struct FreeDeleter {
        void operator()(Slot* p) const { std::free(p); }
    };

    std::unique_ptr<Slot[], FreeDeleter> slots_;
    std::size_t capacity_ = 0;
    std::size_t mask_ = 0;
    std::size_t count_ = 0;
    std::uint64_t hits_ = 0;
    std::uint64_t misses_ = 0;
};

/// Memoized distance: first request for a pair computes and records it, later
/// requests return the stored value at O(1) cost.
inline double cached_distance(PairCache& cache, const Dataset& dataset, std::uint32_t i, std::uint32_t j) {
    if (const auto known = cache.find(i, j)) return *known;
    const double d = dataset.distance(i, j);
    cache.insert_new(i, j, d);
    return d;
}

}  // namespace knng
