#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

#include "knng/builder.hpp"
#include "knng/oracle.hpp"
#include "knng/synthetic.hpp"

using namespace knng;

namespace {

std::vector<std::uint32_t> iota_ids(std::size_t n) {
    std::vector<std::uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0u);
    return ids;
}

BuildConfig base_config(std::uint32_t k) {
    BuildConfig cfg;
    cfg.k = k;
    return cfg;
}

}  // namespace

TEST_CASE("cached_distance computes once and replays from the cache") {
    const auto ds = gaussian_mixture_dataset({.n = 10, .d = 4, .clusters = 1, .seed = 0});
    PairCache cache;
    const double first = cached_distance(cache, ds, 3, 7);
    CHECK(cache.misses() == 1);
    CHECK(cache.hits() == 0);

    // mirrored pair: same unordered key
    const double second = cached_distance(cache, ds, 7, 3);
    CHECK(second == first);
    CHECK(cache.misses() == 1);
    CHECK(cache.hits() == 1);
    CHECK(cache.size() == 1);
    CHECK(ds.distance_evaluations() == 1);
}

TEST_CASE("pair cache rejects degenerate pairs and double inserts") {
    PairCache cache;
    CHECK_THROWS_AS(cache.find(4, 4), std::invalid_argument);
    cache.insert_new(1, 2, 0.5);
    CHECK_THROWS_AS(cache.insert_new(2, 1, 0.5), std::logic_error);
}

TEST_CASE("pair cache survives growth") {
    PairCache cache(4);
    const std::uint32_t n = 600;  // ~180k pairs through several rehashes
    std::uint32_t inserted = 0;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j) {
            cache.insert_new(i, j, static_cast<double>(i) * n + j);
            ++inserted;
        }
    CHECK(cache.size() == inserted);
    for (std::uint32_t i = 0; i < n; i += 7)
        for (std::uint32_t j = i + 1; j < n; j += 13) {
            const auto v = cache.find(j, i);
            REQUIRE(v.has_value());
            CHECK(*v == static_cast<double>(i) * n + j);
        }
}

TEST_CASE("pairwise_update offers the pair to both lists") {
    KnnGraph graph(4, 2);
    auto [u_in, v_in] = pairwise_update(graph, 0, 1, 1.0);
    CHECK(u_in);
    CHECK(v_in);

    // fill 0's list with closer points; 3's list stays empty
    pairwise_update(graph, 0, 2, 0.5);
    auto [far_u, far_v] = pairwise_update(graph, 0, 3, 9.0);
    CHECK_FALSE(far_u);
    CHECK(far_v);
}

TEST_CASE("a leaf with a single point changes nothing") {
    const auto ds = gaussian_mixture_dataset({.n = 5, .d = 2, .clusters = 1, .seed = 1});
    KnnGraph graph(5, 2);
    PairCache cache;
    const std::vector<std::uint32_t> leaf{2};
    build_leaf_subgraph(graph, ds, leaf, cache);
    CHECK(graph.edge_count() == 0);
    CHECK(cache.misses() == 0);
}

TEST_CASE("a leaf covering the whole dataset reproduces the brute-force graph") {
    const auto ds = gaussian_mixture_dataset({.n = 200, .d = 8, .clusters = 4, .seed = 2});
    KnnGraph graph(200, 6);
    PairCache cache;
    build_leaf_subgraph(graph, ds, iota_ids(200), cache);
    CHECK(graph == brute_force_graph(ds, 6));
}

TEST_CASE("disjoint leaves create no cross-leaf edges") {
    const auto ds = gaussian_mixture_dataset({.n = 20, .d = 4, .clusters = 2, .seed = 3});
    KnnGraph graph(20, 3);
    PairCache cache;
    std::vector<std::uint32_t> a, b;
    for (std::uint32_t i = 0; i < 20; ++i) (i < 10 ? a : b).push_back(i);
    build_leaf_subgraph(graph, ds, a, cache);
    build_leaf_subgraph(graph, ds, b, cache);
    for (std::uint32_t i = 0; i < 20; ++i)
        for (const auto& e : graph.list(i).entries()) CHECK((i < 10) == (e.id < 10));
}

TEST_CASE("replaying the pairwise-update stream through a sort oracle matches the graph") {
    const auto ds = gaussian_mixture_dataset({.n = 120, .d = 6, .clusters = 3, .seed = 4});
    const std::uint32_t k = 5;
    KnnGraph graph(120, k);
    PairCache cache;

    // two overlapping leaves so some pairs repeat through the cache
    std::vector<std::uint32_t> first, second;
    for (std::uint32_t i = 0; i < 80; ++i) first.push_back(i);
    for (std::uint32_t i = 40; i < 120; ++i) second.push_back(i);
    build_leaf_subgraph(graph, ds, first, cache);
    build_leaf_subgraph(graph, ds, second, cache);

    // oracle: every unordered pair offered inside any leaf, k smallest kept
    std::vector<std::vector<Neighbor>> offered(120);
    auto offer_all = [&](const std::vector<std::uint32_t>& leaf) {
        for (std::size_t a = 0; a + 1 < leaf.size(); ++a)
            for (std::size_t b = a + 1; b < leaf.size(); ++b) {
                const double d = euclidean_distance(ds.row(leaf[a]), ds.row(leaf[b]));
                offered[leaf[a]].push_back({leaf[b], d});
                offered[leaf[b]].push_back({leaf[a], d});
            }
    };
    offer_all(first);
    offer_all(second);
    for (std::uint32_t p = 0; p < 120; ++p) {
        auto& cands = offered[p];
        std::sort(cands.begin(), cands.end(), neighbor_less);
        cands.erase(std::unique(cands.begin(), cands.end(),
                                [](const Neighbor& a, const Neighbor& b) { return a.id == b.id; }),
                    cands.end());
        if (cands.size() > k) cands.resize(k);
        CHECK(graph.list(p).entries() == cands);
    }
}

TEST_CASE("effective rate: first division is 1, a repeated division is 0") {
    // one all-containing leaf per division: every division finds the same pairs
    const auto ds = gaussian_mixture_dataset({.n = 50, .d = 4, .clusters = 1, .seed = 5});
    auto cfg = base_config(4);
    cfg.division.max_leaf_size = 100;
    cfg.max_divisions = 3;
    cfg.enable_propagation = false;
    const auto [graph, stats] = build_graph(ds, cfg);
    REQUIRE(stats.divisions_run == 3);
    CHECK(effective_rate(stats, 1) == 1.0);
    CHECK(effective_rate(stats, 2) == 0.0);
    CHECK(effective_rate(stats, 3) == 0.0);
    CHECK_THROWS_AS(effective_rate(stats, 0), std::invalid_argument);
    CHECK_THROWS_AS(effective_rate(stats, 4), std::invalid_argument);
}

TEST_CASE("a full build never computes a distance twice") {
    const auto ds = gaussian_mixture_dataset({.n = 2000, .d = 8, .clusters = 10, .seed = 6});
    auto cfg = base_config(8);
    cfg.division.max_leaf_size = 128;
    cfg.max_divisions = 6;
    const auto [graph, stats] = build_graph(ds, cfg);
    CHECK(ds.distance_evaluations() == stats.cache_misses);
    CHECK(stats.cache_misses <= 2000ull * 1999 / 2);
    CHECK(validate_graph(graph, ds).empty());
}

TEST_CASE("single all-containing division without propagation is exact") {
    const auto ds = gaussian_mixture_dataset({.n = 300, .d = 8, .clusters = 5, .seed = 7});
    auto cfg = base_config(10);
    cfg.division.max_leaf_size = 301;
    cfg.max_divisions = 1;
    cfg.enable_propagation = false;
    const auto [graph, stats] = build_graph(ds, cfg);
    CHECK(graph == brute_force_graph(ds, 10));
    CHECK(stats.divisions_run == 1);
    CHECK_FALSE(stats.propagation_ran);
}

TEST_CASE("more divisions with a shared seed prefix never lose accuracy") {
    const auto ds = gaussian_mixture_dataset({.n = 1200, .d = 12, .clusters = 8, .seed = 8});
    const auto exact = brute_force_graph(ds, 6);
    auto cfg = base_config(6);
    cfg.division.max_leaf_size = 100;
    cfg.division.seed = 42;
    cfg.enable_propagation = false;

    cfg.max_divisions = 4;
    const auto [graph4, stats4] = build_graph(ds, cfg);
    cfg.max_divisions = 8;
    const auto [graph8, stats8] = build_graph(ds, cfg);
    CHECK(graph_accuracy(graph8, exact) >= graph_accuracy(graph4, exact));

    // shared prefix: the first four division records agree
    for (int m = 0; m < 4; ++m) {
        CHECK(stats8.divisions[m].new_pairs == stats4.divisions[m].new_pairs);
        CHECK(stats8.divisions[m].cumulative_pairs == stats4.divisions[m].cumulative_pairs);
    }
}

TEST_CASE("the trigger stops divisions and runs propagation once") {
    // single-leaf divisions make r_2 = 0 < threshold: trigger at m = 2
    const auto ds = gaussian_mixture_dataset({.n = 60, .d = 4, .clusters = 2, .seed = 9});
    auto cfg = base_config(4);
    cfg.division.max_leaf_size = 100;
    cfg.max_divisions = 10;
    const auto [graph, stats] = build_graph(ds, cfg);
    REQUIRE(stats.propagation_triggered_at.has_value());
    CHECK(*stats.propagation_triggered_at == 2);
    CHECK(stats.divisions_run == 2);
    CHECK(stats.propagation_ran);
}

TEST_CASE("propagation also runs when all divisions complete without triggering") {
    const auto ds = gaussian_mixture_dataset({.n = 400, .d = 8, .clusters = 4, .seed = 10});
    auto cfg = base_config(5);
    cfg.division.max_leaf_size = 64;
    cfg.max_divisions = 2;  // too few for the rate to decay below 0.05
    const auto [graph, stats] = build_graph(ds, cfg);
    CHECK_FALSE(stats.propagation_triggered_at.has_value());
    CHECK(stats.divisions_run == 2);
    CHECK(stats.propagation_ran);
    CHECK(validate_graph(graph, ds).empty());
}

TEST_CASE("builds are deterministic given the seed") {
    const auto ds = gaussian_mixture_dataset({.n = 500, .d = 8, .clusters = 5, .seed = 11});
    auto cfg = base_config(6);
    cfg.division.max_leaf_size = 64;
    cfg.division.seed = 123;
    const auto [a, stats_a] = build_graph(ds, cfg);
    const auto [b, stats_b] = build_graph(ds, cfg);
    CHECK(a == b);
    CHECK(stats_a.cache_misses == stats_b.cache_misses);
    CHECK(stats_a.divisions_run == stats_b.divisions_run);
}

TEST_CASE("per-division stats add up") {
    const auto ds = gaussian_mixture_dataset({.n = 800, .d = 8, .clusters = 6, .seed = 12});
    auto cfg = base_config(5);
    cfg.division.max_leaf_size = 100;
    cfg.max_divisions = 5;
    cfg.enable_propagation = false;
    const auto [graph, stats] = build_graph(ds, cfg);
    std::uint64_t news = 0;
    for (int m = 1; m <= stats.divisions_run; ++m) {
        const auto& rec = stats.divisions[static_cast<std::size_t>(m) - 1];
        news += rec.new_pairs;
        CHECK(rec.cumulative_pairs == news);
        CHECK(rec.new_pairs == rec.distance_computations);
        CHECK(rec.effective_rate >= 0.0);
        CHECK(rec.effective_rate <= 1.0);
    }
    CHECK(stats.divisions[0].effective_rate == 1.0);
}

TEST_CASE("config validation catches bad parameters") {
    CHECK_THROWS_AS(build_graph(gaussian_mixture_dataset({.n = 10, .d = 2, .clusters = 1, .seed = 0}),
                                [] {
                                    auto cfg = base_config(3);
                                    cfg.trigger_threshold = 1.5;
                                    return cfg;
                                }()),
                    std::invalid_argument);
    auto cfg = base_config(5);
    cfg.propagation_budget = 2;  // below k
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config(5);
    cfg.max_divisions = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(base_config(5).effective_budget() == 500);
}

TEST_CASE("a small leaf bound earns a warning") {
    auto cfg = base_config(10);
    cfg.division.max_leaf_size = 15;
    CHECK_FALSE(config_warnings(cfg).empty());
    CHECK(config_warnings(base_config(10)).empty());
}

TEST_CASE("the division observer sees every division") {
    const auto ds = gaussian_mixture_dataset({.n = 300, .d = 6, .clusters = 3, .seed = 13});
    auto cfg = base_config(4);
    cfg.division.max_leaf_size = 50;
    cfg.max_divisions = 4;
    cfg.enable_propagation = false;
    std::vector<int> seen;
    build_graph(ds, cfg, [&seen](int m, const KnnGraph& g, const BuildStats& s) {
        seen.push_back(m);
        CHECK(g.size() == 300);
        CHECK(s.divisions_run == m);
    });
    CHECK(seen == std::vector<int>{1, 2, 3, 4});
}
