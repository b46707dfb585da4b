// Core domain types: dataset, metrics, bounded sorted neighbor lists and the
// directed k-NN graph, plus the graph validity checker.
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace knng {

enum class Metric { euclidean, cosine };

inline const char* to_string(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "cosine";
}

inline Metric metric_from_string(std::string_view s) {
    if (s == "euclidean") return Metric::euclidean;
    if (s == "cosine") return Metric::cosine;
    throw std::invalid_argument("unknown metric: " + std::string(s));
}

// Raw distance kernels. Plain ascending-index loops: every caller that needs
// bit-identical values (graph validation, the brute-force oracle, the cache)
// goes through these two functions.

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double diff = a[t] - b[t];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

// 1 - cos(a, b), clamped to [0, 2]. Throws if either vector has zero norm.
inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        dot += a[t] * b[t];
        na += a[t] * a[t];
        nb += b[t] * b[t];
    }
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine distance undefined for zero-norm vector");
    const double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return d < 0.0 ? 0.0 : (d > 2.0 ? 2.0 : d);
}

/// Immutable set of n points of dimension d with a fixed metric.
/// Counts every raw kernel evaluation made through distance(); the counter is
/// how the build verifies it never computes a pair twice.
class Dataset {
public:
    Dataset(std::size_t n, std::size_t d, std::vector<double> points, Metric metric)
        : n_(n), d_(d), points_(std::move(points)), metric_(metric) {
        if (n_ < 2) throw std::invalid_argument("dataset needs at least 2 points");
        if (d_ < 1) throw std::invalid_argument("dataset needs dimension >= 1");
        if (points_.size() != n_ * d_)
            throw std::invalid_argument("dataset buffer size does not match n*d");
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (!std::isfinite(points_[i]))
                throw std::invalid_argument("dataset has a non-finite coordinate at flat index " +
                                            std::to_string(i));
        if (metric_ == Metric::cosine) {
            for (std::size_t i = 0; i < n_; ++i) {
                double norm2 = 0.0;
                for (std::size_t t = 0; t < d_; ++t) norm2 += points_[i * d_ + t] * points_[i * d_ + t];
                if (norm2 == 0.0)
                    throw std::invalid_argument("cosine metric requires nonzero vectors; point " +
                                                std::to_string(i) + " has zero norm");
            }
        }
        digest_ = compute_digest();
    }

    static Dataset from_rows(const std::vector<std::vector<double>>& rows, Metric metric) {
        if (rows.empty()) throw std::invalid_argument("dataset needs at least 2 points");
        std::vector<double> flat;
        flat.reserve(rows.size() * rows.front().size());
        for (const auto& r : rows) {
            if (r.size() != rows.front().size())
                throw std::invalid_argument("rows have inconsistent dimension");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return Dataset(rows.size(), rows.front().size(), std::move(flat), metric);
    }

    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }
    Metric metric() const { return metric_; }
    std::span<const double> row(std::size_t i) const { return {points_.data() + i * d_, d_}; }
    std::span<const double> raw() const { return points_; }

    double distance(std::uint32_t i, std::uint32_t j) const {
        if (i == j) throw std::invalid_argument("distance requires two distinct points");
        if (i >= n_ || j >= n_) throw std::invalid_argument("point index out of range");
        kernel_calls_.fetch_add(1, std::memory_order_relaxed);
        return metric_ == Metric::euclidean ? euclidean_distance(row(i), row(j))
                                            : cosine_distance(row(i), row(j));
    }

    std::uint64_t distance_evaluations() const { return kernel_calls_.load(std::memory_order_relaxed); }

    /// FNV-1a over shape, metric tag and raw coordinate bytes. Binds graph
    /// files to the dataset they were built from.
    std::uint64_t digest() const { return digest_; }

private:
    std::uint64_t compute_digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto absorb = [&h](const void* p, std::size_t len) {
            const auto* bytes = static_cast<const unsigned char*>(p);
            for (std::size_t t = 0; t < len; ++t) {
                h ^= bytes[t];
                h *= 0x100000001b3ULL;
            }
        };
        const std::uint64_t n64 = n_, d64 = d_;
        const std::uint8_t tag = metric_ == Metric::euclidean ? 0 : 1;
        absorb(&n64, sizeof n64);
        absorb(&d64, sizeof d64);
        absorb(&tag, sizeof tag);
        absorb(points_.data(), points_.size() * sizeof(double));
        return h;
    }

    std::size_t n_, d_;
    std::vector<double> points_;
    Metric metric_;
    mutable std::atomic<std::uint64_t> kernel_calls_{0};
    std::uint64_t digest_ = 0;
};

struct Neighbor {
    std::uint32_t id;
    double dist;
};

// global ordering used everywhere: ascending distance, ties by ascending id
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.id < b.id);
}

inline bool operator==(const Neighbor& a, const Neighbor& b) {
    return a.id == b.id && a.dist == b.dist;
}

/// Sorted fixed-capacity list of a point's current nearest neighbors.
class NeighborList {
public:
    NeighborList(std::uint32_t owner, std::uint32_t capacity) : owner_(owner), capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("neighbor capacity must be >= 1");
    }

    std::uint32_t owner() const { return owner_; }
    std::uint32_t capacity() const { return capacity_; }
    const std::vector<Neighbor>& entries() const { return entries_; }
    bool full() const { return entries_.size() >= capacity_; }

    bool contains(std::uint32_t id) const {
        for (const auto& e : entries_)
            if (e.id == id) return true;
        return false;
    }

    /// Adopt entries verbatim, trusting the caller. Deserialization uses this
    /// so a file round-trips exactly; validate_graph judges semantic validity.
    void adopt_entries(std::vector<Neighbor> entries) { entries_ = std::move(entries); }

    /// Offer a candidate; keeps the k lexicographically smallest (dist, id)
    /// entries seen so far. Returns whether the list changed. Re-offering an
    /// id already present is a no-op (candidate distances for one pair are
    /// always equal, so the cheap tail rejection below stays exact).
    bool try_insert(Neighbor cand) {
        if (cand.id == owner_) throw std::invalid_argument("cannot insert a point into its own list");
        if (entries_.size() >= capacity_) {
            if (!neighbor_less(cand, entries_.back())) return false;
            if (contains(cand.id)) return false;
            entries_.pop_back();
        } else if (contains(cand.id)) {
            return false;
        }
        auto pos = entries_.begin();
        while (pos != entries_.end() && neighbor_less(*pos, cand)) ++pos;
        entries_.insert(pos, cand);
        return true;
    }

private:
    std::uint32_t owner_;
    std::uint32_t capacity_;
    std::vector<Neighbor> entries_;
};

/// Directed k-NN graph: one NeighborList per point.
class KnnGraph {
public:
    KnnGraph(std::size_t n, std::uint32_t k) : k_(k) {
        if (k == 0) throw std::invalid_argument("k must be >= 1");
        lists_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) lists_.emplace_back(static_cast<std::uint32_t>(i), k);
    }

    std::uint32_t k() const { return k_; }
    std::size_t size() const { return lists_.size(); }
    NeighborList& list(std::size_t i) { return lists_[i]; }
    const NeighborList& list(std::size_t i) const { return lists_[i]; }

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (const auto& l : lists_) total += l.entries().size();
        return total;
    }

private:
    std::uint32_t k_;
    std::vector<NeighborList> lists_;
};

inline bool operator==(const KnnGraph& a, const KnnGraph& b) {
    if (a.k() != b.k() || a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.list(i).entries() != b.list(i).entries()) return false;
    return true;
}

/// Check every graph invariant against the dataset. Returns one message per
/// violation; an empty result means the graph is valid. Stored distances are
/// re-derived through the raw kernels (relative tolerance 1e-6) without
/// touching the dataset's evaluation counter.
inline std::vector<std::string> validate_graph(const KnnGraph& graph, const Dataset& dataset) {
    std::vector<std::string> violations;
    auto report = [&violations](const std::string& msg) { violations.push_back(msg); };

    if (graph.size() != dataset.size()) {
        report("graph has " + std::to_string(graph.size()) + " lists for " +
               std::to_string(dataset.size()) + " points");
        return violations;
    }
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const auto& list = graph.list(i);
        const auto& es = list.entries();
        if (list.owner() != i)
            report("list at slot " + std::to_string(i) + " owned by point " + std::to_string(list.owner()));
        if (es.size() > graph.k())
            report("point " + std::to_string(i) + " has " + std::to_string(es.size()) +
                   " entries, budget " + std::to_string(graph.k()));
        for (std::size_t e = 0; e < es.size(); ++e) {
            const auto& nb = es[e];
            if (nb.id == i) {
                report("point " + std::to_string(i) + " has a self-loop");
                continue;
            }
            if (nb.id >= dataset.size()) {
                report("point " + std::to_string(i) + " references out-of-range id " + std::to_string(nb.id));
                continue;
            }
            if (e > 0 && !neighbor_less(es[e - 1], nb))
                report("point " + std::to_string(i) + " entries not strictly (dist, id)-sorted at rank " +
                       std::to_string(e));
            for (std::size_t e2 = e + 1; e2 < es.size(); ++e2)
                if (es[e2].id == nb.id)
                    report("point " + std::to_string(i) + " lists id " + std::to_string(nb.id) + " twice");
            const double want = dataset.metric() == Metric::euclidean
                                    ? euclidean_distance(dataset.row(i), dataset.row(nb.id))
                                    : cosine_distance(dataset.row(i), dataset.row(nb.id));
            const double tol = 1e-6 * std::max(std::abs(want), std::abs(nb.dist));
            if (std::abs(nb.dist - want) > tol)
                report("pair (" + std::to_string(i) + ", " + std::to_string(nb.id) + ") stores distance " +
                       std::to_string(nb.dist) + ", recomputed " + std::to_string(want));
        }
    }
    return violations;
}

}  // namespace knng
