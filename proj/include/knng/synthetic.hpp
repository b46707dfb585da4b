// Synthetic Gaussian-mixture vectors so benchmarks and acceptance runs need no
// external corpora.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "knng/core.hpp"
#include "knng/rng.hpp"

namespace knng {

struct MixtureParams {
    std::size_t n = 1000;
    std::size_t d = 16;
    std::size_t clusters = 10;
    double cluster_sigma = 1.0;   // per-coordinate spread within a cluster
    double center_sigma = 1.0;    // per-coordinate spread of the cluster centers
    std::uint64_t seed = 0;
};

/// Row-major sample of a Gaussian mixture. Cluster centers are N(0,
/// center_sigma^2 I); each cluster owns a contiguous block of indices and its
/// points are N(center, cluster_sigma^2 I). Deterministic given the seed.
inline std::vector<double> gaussian_mixture(const MixtureParams& params) {
    if (params.n < 2) throw std::invalid_argument("mixture needs at least 2 points");
    if (params.d < 1) throw std::invalid_argument("mixture needs dimension >= 1");
    if (params.clusters < 1 || params.clusters > params.n)
        throw std::invalid_argument("cluster count must lie in [1, n]");

    Rng rng(params.seed);
    std::vector<double> centers(params.clusters * params.d);
    for (auto& c : centers) c = params.center_sigma * rnd::gaussian(rng);

    std::vector<double> points;
    points.reserve(params.n * params.d);
    const std::size_t base = params.n / params.clusters;
    const std::size_t extra = params.n % params.clusters;
    for (std::size_t c = 0; c < params.clusters; ++c) {
        const std::size_t count = base + (c < extra ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t t = 0; t < params.d; ++t)
                points.push_back(centers[c * params.d + t] + params.cluster_sigma * rnd::gaussian(rng));
    }
    return points;
}

inline Dataset gaussian_mixture_dataset(const MixtureParams& params, Metric metric = Metric::euclidean) {
    return Dataset(params.n, params.d, gaussian_mixture(params), metric);
}

}  // namespace knng
