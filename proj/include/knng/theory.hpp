// Closed-form discovery probabilities for the idealized random-hyperplane
// partition model, collision probabilities for the two metrics, and the
// Monte-Carlo simulator used to validate the formulas. The model treats every
// hyperplane of every tree as an independent Bernoulli co-location event,
// which is exactly the assumption the closed forms are derived under; real
// partition trees are correlated, so these validate the formulas, not the
// builder.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "knng/rng.hpp"

namespace knng {

namespace detail {
inline void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}
inline void check_depth(int h) {
    if (h < 1) throw std::invalid_argument("tree depth must be >= 1");
}
}  // namespace detail

/// Chance that a pair co-located per hyperplane with probability P ends up in
/// the same leaf of one depth-h tree.
inline double single_tree_prob(double P, int h) {
    detail::check_prob(P, "P");
    detail::check_depth(h);
    return std::pow(P, h);
}

/// Chance that at least one of L independent trees co-locates the pair.
inline double multi_tree_prob(double P, int h, int L) {
    detail::check_prob(P, "P");
    detail::check_depth(h);
    if (L < 0) throw std::invalid_argument("tree count must be >= 0");
    return 1.0 - std::pow(1.0 - single_tree_prob(P, h), L);
}

/// Chance that the L-th tree discovers the pair after the first L-1 missed it.
/// Decreasing in L: fresh divisions contribute less and less.
inline double new_discovery_prob(double P, int h, int L) {
    detail::check_prob(P, "P");
    detail::check_depth(h);
    if (L < 1) throw std::invalid_argument("tree count must be >= 1");
    const double q = single_tree_prob(P, h);
    return std::pow(1.0 - q, L - 1) * q;
}

/// Chance that, after L-1 trees, a path of per-edge co-location probabilities
/// has every edge discovered, connecting its endpoints through propagation.
inline double path_propagation_prob(std::span<const double> edge_probs, int h, int L) {
    if (edge_probs.empty()) throw std::invalid_argument("propagation path needs at least one edge");
    detail::check_depth(h);
    if (L < 1) throw std::invalid_argument("tree count must be >= 1");
    double result = 1.0;
    for (const double P : edge_probs) {
        detail::check_prob(P, "edge probability");
        result *= 1.0 - std::pow(1.0 - single_tree_prob(P, h), L - 1);
    }
    return result;
}

/// Two-edge case: both endpoints share a neighbor n, and both (i, n) and
/// (j, n) have been discovered within L-1 trees.
inline double propagation_prob(double P_in, double P_jn, int h, int L) {
    const double edges[] = {P_in, P_jn};
    return path_propagation_prob(edges, h, L);
}

/// Lower bound on discovery by L trees combined with one first-order
/// propagation pass, with every pair probability at least P.
inline double combined_lower_bound(double P, int h, int L) {
    detail::check_prob(P, "P");
    detail::check_depth(h);
    if (L < 1) throw std::invalid_argument("tree count must be >= 1");
    const double miss = 1.0 - single_tree_prob(P, h);
    return 1.0 - std::pow(miss, 2 * L) * (2.0 - std::pow(miss, L));
}

/// Per-hyperplane co-location probability of two vectors at angular distance d
/// under random-projection sign splits.
inline double cosine_collision_prob(double d) {
    constexpr double pi = 3.14159265358979323846;
    if (!(d >= 0.0 && d <= pi)) throw std::invalid_argument("angular distance must lie in [0, pi]");
    return 1.0 - d / pi;
}

namespace detail {

// density of |N(0, 1)|
inline double folded_gaussian_pdf(double x) {
    return std::sqrt(2.0 / 3.14159265358979323846) * std::exp(-0.5 * x * x);
}

template <typename F>
double adaptive_simpson(F f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// Collision probability of the stable-distribution hash with window w for two
/// points at Euclidean distance d: integral over [0, w] of
/// (1/d) f(t/d) (1 - t/w) dt with f the density of |N(0, 1)|. Quadrature is
/// adaptive Simpson driven to absolute error well under 1e-8.
inline double euclidean_collision_prob(double d, double w) {
    if (!(d > 0.0)) throw std::invalid_argument("distance must be positive");
    if (!(w > 0.0)) throw std::invalid_argument("window must be positive");
    auto integrand = [d, w](double t) {
        return detail::folded_gaussian_pdf(t / d) / d * (1.0 - t / w);
    };
    return detail::integrate(integrand, 0.0, w, 1e-10);
}

// --- Monte-Carlo validation ---------------------------------------------------

struct TreeModel {
    double co_location_prob = 0.5;  // P, per-hyperplane
    int depth = 1;                  // h
    int trees = 1;                  // L
};

enum class DiscoveryEvent {
    any_tree,             // discovered by at least one of the L trees
    new_at_last_tree,     // missed by the first L-1 trees, found by the L-th
    propagation_path,     // every path edge discovered within L-1 trees
    tree_or_first_order,  // any tree directly, or both shared-neighbor edges within L trees
};

inline const char* to_string(DiscoveryEvent e) {
    switch (e) {
        case DiscoveryEvent::any_tree: return "any_tree";
        case DiscoveryEvent::new_at_last_tree: return "new_at_last_tree";
        case DiscoveryEvent::propagation_path: return "propagation_path";
        case DiscoveryEvent::tree_or_first_order: return "tree_or_first_order";
    }
    return "?";
}

struct SimulationResult {
    double frequency = 0.0;
    double standard_error = 0.0;
};

/// Empirical discovery frequency under the idealized model: per trial, each
/// relevant pair gets L independent trees of h independent Bernoulli(P)
/// co-location events. Degenerate P (0 or 1) is resolved analytically.
inline SimulationResult simulate_discovery(const TreeModel& model, DiscoveryEvent event,
                                           std::size_t trials, Rng& rng, int path_edges = 2) {
    detail::check_prob(model.co_location_prob, "P");
    detail::check_depth(model.depth);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const int L = model.trees;
    const int min_trees = event == DiscoveryEvent::any_tree ? 0 : 1;
    if (L < min_trees) throw std::invalid_argument("tree count too small for this event");
    if (event == DiscoveryEvent::propagation_path && path_edges < 1)
        throw std::invalid_argument("propagation path needs at least one edge");

    const double P = model.co_location_prob;
    if (P == 1.0 || P == 0.0) {
        const bool each = P == 1.0;  // every pair is discovered by any available tree
        bool happens = false;
        switch (event) {
            case DiscoveryEvent::any_tree: happens = each && L >= 1; break;
            case DiscoveryEvent::new_at_last_tree: happens = each && L == 1; break;
            case DiscoveryEvent::propagation_path: happens = each && L >= 2; break;
            case DiscoveryEvent::tree_or_first_order: happens = each && L >= 1; break;
        }
        return {happens ? 1.0 : 0.0, 0.0};
    }

    auto pair_discovered = [&](int tree_count) {
        for (int t = 0; t < tree_count; ++t) {
            bool together = true;
            for (int level = 0; level < model.depth; ++level)
                if (!(rnd::unit_double(rng) < P)) {
                    together = false;
                    break;
                }
            if (together) return true;
        }
        return false;
    };

    std::size_t successes = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        bool happened = false;
        switch (event) {
            case DiscoveryEvent::any_tree:
                happened = pair_discovered(L);
                break;
            case DiscoveryEvent::new_at_last_tree: {
                const bool before = pair_discovered(L - 1);
                const bool last = pair_discovered(1);
                happened = !before && last;
                break;
            }
            case DiscoveryEvent::propagation_path: {
                happened = true;
                for (int e = 0; e < path_edges; ++e)
                    if (!pair_discovered(L - 1)) happened = false;
                break;
            }
            case DiscoveryEvent::tree_or_first_order: {
                const bool direct = pair_discovered(L);
                const bool via_i = pair_discovered(L);
                const bool via_j = pair_discovered(L);
                happened = direct || (via_i && via_j);
                break;
            }
        }
        if (happened) ++successes;
    }
    const double freq = static_cast<double>(successes) / static_cast<double>(trials);
    return {freq, std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials))};
}

}  // namespace knng
