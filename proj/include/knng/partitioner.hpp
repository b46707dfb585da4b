// One random hierarchical division of the point set: recursively split along
// randomized principal directions until every leaf holds fewer than g points.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "knng/core.hpp"
#include "knng/rng.hpp"

namespace knng {

struct DivisionConfig {
    std::size_t max_leaf_size = 500;  // g: recursion stops when a subset gets smaller than this
    std::size_t pca_sample = 1000;    // points sampled per subset for direction estimation
    int power_iters = 20;             // dominant-eigenvector iteration budget
    std::uint64_t seed = 0;

    void validate() const {
        if (max_leaf_size < 2) throw std::invalid_argument("max leaf size must be >= 2");
        if (pca_sample < 2) throw std::invalid_argument("pca sample must be >= 2");
        if (power_iters < 1) throw std::invalid_argument("power iterations must be >= 1");
    }
};

struct Division {
    std::vector<std::vector<std::uint32_t>> leaves;
    int depth = 0;  // deepest split count along any root-to-leaf path
};

/// Approximate dominant eigenvector of the covariance of up to cfg.pca_sample
/// points drawn uniformly without replacement from the subset. Power iteration
/// from a random unit start; the sampling is what randomizes the direction.
/// Returns nullopt when the sampled covariance is zero (all points identical).
inline std::optional<std::vector<double>> random_principal_direction(const Dataset& dataset,
                                                                     std::span<const std::uint32_t> subset,
                                                                     const DivisionConfig& cfg, Rng& rng) {
    if (subset.size() < 2) throw std::invalid_argument("direction estimation needs >= 2 points");
    const std::size_t d = dataset.dim();
    const std::size_t s = std::min(subset.size(), cfg.pca_sample);

    // partial Fisher-Yates: first s entries become the sample
    std::vector<std::uint32_t> sample(subset.begin(), subset.end());
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = i + rnd::below(rng, sample.size() - i);
        std::swap(sample[i], sample[j]);
    }
    sample.resize(s);

    std::vector<double> mean(d, 0.0);
    for (const auto id : sample) {
        const auto row = dataset.row(id);
        for (std::size_t t = 0; t < d; ++t) mean[t] += row[t];
    }
    for (auto& m : mean) m /= static_cast<double>(s);

    std::vector<double> v(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t t = 0; t < d; ++t) {
            v[t] = rnd::gaussian(rng);
            norm2 += v[t] * v[t];
        }
    } while (norm2 == 0.0);
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;

    std::vector<double> w(d);
    for (int iter = 0; iter < cfg.power_iters; ++iter) {
        std::fill(w.begin(), w.end(), 0.0);
        for (const auto id : sample) {
            const auto row = dataset.row(id);
            double coeff = 0.0;
            for (std::size_t t = 0; t < d; ++t) coeff += (row[t] - mean[t]) * v[t];
            for (std::size_t t = 0; t < d; ++t) w[t] += coeff * (row[t] - mean[t]);
        }
        norm2 = 0.0;
        for (const auto x : w) norm2 += x * x;
        if (norm2 < 1e-250) return std::nullopt;  // degenerate: no variance in the sample
        inv = 1.0 / std::sqrt(norm2);
        for (std::size_t t = 0; t < d; ++t) v[t] = w[t] * inv;
    }
    return v;
}

/// Split a subset at the median projection onto the direction. Points strictly
/// below the median go left, strictly above go right; points exactly at the
/// median are assigned in ascending id order to whichever side is currently
/// smaller (left on ties). Both sides are always nonempty; if every projection
/// is equal the subset is halved in ascending id order instead.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_subset(
    const Dataset& dataset, std::span<const std::uint32_t> subset, std::span<const double> direction) {
    if (subset.size() < 2) throw std::invalid_argument("cannot split a subset of fewer than 2 points");
    const std::size_t d = dataset.dim();

    std::vector<double> proj(subset.size());
    for (std::size_t idx = 0; idx < subset.size(); ++idx) {
        const auto row = dataset.row(subset[idx]);
        double p = 0.0;
        for (std::size_t t = 0; t < d; ++t) p += row[t] * direction[t];
        proj[idx] = p;
    }

    const auto [mn, mx] = std::minmax_element(proj.begin(), proj.end());
    std::vector<std::uint32_t> left, right;
    left.reserve(subset.size() / 2 + 1);
    right.reserve(subset.size() / 2 + 1);
    if (*mn == *mx) {  // degenerate subset: fall back to an id split
        const std::size_t half = (subset.size() + 1) / 2;
        left.assign(subset.begin(), subset.begin() + half);
        right.assign(subset.begin() + half, subset.end());
        return {std::move(left), std::move(right)};
    }

    std::vector<double> sorted(proj);
    const std::size_t mid = (sorted.size() - 1) / 2;
    std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
    const double median = sorted[mid];

    for (std::size_t idx = 0; idx < subset.size(); ++idx) {
        if (proj[idx] < median) {
            left.push_back(subset[idx]);
        } else if (proj[idx] > median) {
            right.push_back(subset[idx]);
        }
    }
    for (std::size_t idx = 0; idx < subset.size(); ++idx) {
        if (proj[idx] == median) {
            if (right.size() < left.size())
                right.push_back(subset[idx]);
            else
                left.push_back(subset[idx]);
        }
    }
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    return {std::move(left), std::move(right)};
}

/// One full random division of [0, n): repeated principal-direction splits
/// until every leaf has fewer than cfg.max_leaf_size points. Pure function of
/// (dataset, cfg, rng state).
inline Division random_division(const Dataset& dataset, const DivisionConfig& cfg, Rng& rng) {
    cfg.validate();
    Division division;

    struct Node {
        std::vector<std::uint32_t> ids;
        int depth;
    };
    std::vector<Node> stack;
    std::vector<std::uint32_t> all(dataset.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    stack.push_back({std::move(all), 0});

    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (node.ids.size() < cfg.max_leaf_size) {
            division.depth = std::max(division.depth, node.depth);
            division.leaves.push_back(std::move(node.ids));
            continue;
        }
        const auto direction = random_principal_direction(dataset, node.ids, cfg, rng);
        std::vector<std::uint32_t> left, right;
        if (direction) {
            std::tie(left, right) = split_subset(dataset, node.ids, *direction);
        } else {  // zero covariance: an id split keeps the recursion terminating
            const std::size_t half = (node.ids.size() + 1) / 2;
            left.assign(node.ids.begin(), node.ids.begin() + half);
            right.assign(node.ids.begin() + half, node.ids.end());
        }
        stack.push_back({std::move(right), node.depth + 1});
        stack.push_back({std::move(left), node.depth + 1});
    }
    return division;
}

inline Division random_division(const Dataset& dataset, const DivisionConfig& cfg) {
    Rng rng(cfg.seed);
    return random_division(dataset, cfg, rng);
}

}  // namespace knng
