// Command-line toolkit: synthetic data generation, approximate and exact graph
// construction, accuracy evaluation, the bench harness and the theory table.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "knng/knng.hpp"

namespace {

using nlohmann::json;

struct InputOptions {
    std::string path;
    std::string format = "fvecs";
    std::string metric = "euclidean";
};

void add_input_options(CLI::App* cmd, InputOptions& opts) {
    cmd->add_option("--input", opts.path, "vector file")->required();
    cmd->add_option("--format", opts.format, "vector file format")
        ->check(CLI::IsMember({"fvecs", "bvecs", "csv"}));
    cmd->add_option("--metric", opts.metric, "distance metric")
        ->check(CLI::IsMember({"euclidean", "cosine"}));
}

knng::Dataset load_input(const InputOptions& opts) {
    return knng::load_vectors(opts.path, knng::vector_format_from_string(opts.format),
                              knng::metric_from_string(opts.metric));
}

void write_stats_csv(const std::string& path, const knng::BuildStats& stats) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "division,new_pairs,cumulative_pairs,effective_rate,distance_computations,wall_time_s\n";
    for (std::size_t m = 0; m < stats.divisions.size(); ++m) {
        const auto& rec = stats.divisions[m];
        out << m + 1 << ',' << rec.new_pairs << ',' << rec.cumulative_pairs << ','
            << rec.effective_rate << ',' << rec.distance_computations << ',' << rec.wall_time << '\n';
    }
}

void print_build_summary(const knng::BuildStats& stats) {
    std::printf("divisions run: %d\n", stats.divisions_run);
    if (stats.propagation_triggered_at)
        std::printf("propagation triggered after division %d (effective rate %.4f)\n",
                    *stats.propagation_triggered_at,
                    stats.divisions[static_cast<std::size_t>(*stats.propagation_triggered_at) - 1]
                        .effective_rate);
    if (stats.propagation_ran)
        std::printf("propagation: %.3fs, %llu distance computations\n", stats.propagation_wall_time,
                    static_cast<unsigned long long>(stats.propagation_distance_computations));
    std::printf("total: %.3fs, %llu distance computations, %llu cached pairs (%llu hits)\n",
                stats.total_wall_time, static_cast<unsigned long long>(stats.total_distance_computations),
                static_cast<unsigned long long>(stats.cache_misses),
                static_cast<unsigned long long>(stats.cache_hits));
}

int run_gen(const std::string& output, const std::string& format, knng::MixtureParams params) {
    std::printf("seed = %llu\n", static_cast<unsigned long long>(params.seed));
    const auto data = knng::gaussian_mixture(params);
    if (format == "fvecs")
        knng::save_fvecs(output, params.n, params.d, data);
    else
        knng::save_csv(output, params.n, params.d, data);
    std::printf("wrote %zu points of dimension %zu to %s\n", params.n, params.d, output.c_str());
    return 0;
}

int run_build(const InputOptions& input, knng::BuildConfig cfg, const std::string& output,
              const std::string& stats_out) {
    const auto dataset = load_input(input);
    for (const auto& warning : knng::config_warnings(cfg)) std::fprintf(stderr, "warning: %s\n", warning.c_str());
    std::printf("seed = %llu\n", static_cast<unsigned long long>(cfg.division.seed));
    const auto [graph, stats] = knng::build_graph(dataset, cfg);
    print_build_summary(stats);
    knng::save_graph(graph, dataset, output);
    std::printf("graph written to %s\n", output.c_str());
    if (!stats_out.empty()) write_stats_csv(stats_out, stats);
    return 0;
}

int run_exact(const InputOptions& input, std::uint32_t k, const std::string& output) {
    const auto dataset = load_input(input);
    const auto start = std::chrono::steady_clock::now();
    const auto graph = knng::brute_force_graph(dataset, k);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("brute force: %.3fs, %llu distance computations\n", seconds,
                static_cast<unsigned long long>(dataset.distance_evaluations()));
    knng::save_graph(graph, dataset, output);
    std::printf("graph written to %s\n", output.c_str());
    return 0;
}

int run_eval(const std::string& approx_path, const std::string& exact_path) {
    const auto approx = knng::load_graph(approx_path);
    const auto exact = knng::load_graph(exact_path);
    if (approx.dataset_digest != exact.dataset_digest)
        throw std::runtime_error("graphs were built from different datasets (digest mismatch)");
    std::printf("accuracy %.6f\n", knng::graph_accuracy(approx.graph, exact.graph));
    return 0;
}

knng::BuildConfig config_from_json(const json& j) {
    knng::BuildConfig cfg;
    cfg.k = j.value("k", cfg.k);
    cfg.max_divisions = j.value("divisions", cfg.max_divisions);
    cfg.trigger_threshold = j.value("trigger", cfg.trigger_threshold);
    cfg.propagation_budget = j.value("budget", cfg.propagation_budget);
    cfg.enable_propagation = !j.value("no_propagation", false);
    cfg.division.max_leaf_size = j.value("leaf_size", cfg.division.max_leaf_size);
    cfg.division.pca_sample = j.value("pca_sample", cfg.division.pca_sample);
    cfg.division.power_iters = j.value("power_iters", cfg.division.power_iters);
    cfg.division.seed = j.value("seed", cfg.division.seed);
    return cfg;
}

int run_bench(const InputOptions& input, const std::string& grid_path, const std::string& out_path,
              const std::string& cache_dir) {
    const auto dataset = load_input(input);
    std::ifstream grid_file(grid_path);
    if (!grid_file) throw std::runtime_error("cannot open " + grid_path);
    const json grid_json = json::parse(grid_file);
    std::vector<knng::BuildConfig> grid;
    for (const auto& entry : grid_json) grid.push_back(config_from_json(entry));
    for (const auto& cfg : grid)
        std::printf("config %zu: seed = %llu\n", static_cast<std::size_t>(&cfg - grid.data()),
                    static_cast<unsigned long long>(cfg.division.seed));

    const auto rows = knng::bench_run(dataset, grid, cache_dir);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << "config_id,M,T,trigger,k,seconds,accuracy\n";
    for (const auto& row : rows) {
        out << row.config_id << ',' << row.divisions << ',' << row.budget << ',' << row.trigger << ','
            << row.k << ',' << row.seconds << ',' << row.accuracy << '\n';
        std::printf("config %d: %.3fs accuracy %.6f\n", row.config_id, row.seconds, row.accuracy);
    }
    std::printf("bench table written to %s\n", out_path.c_str());
    return 0;
}

int run_theory(const std::string& out_path, const std::string& grid_path, std::size_t trials,
               std::uint64_t seed) {
    std::vector<double> Ps{0.6, 0.8, 0.9};
    std::vector<int> hs{2, 4};
    std::vector<int> Ls{1, 5};
    if (!grid_path.empty()) {
        std::ifstream grid_file(grid_path);
        if (!grid_file) throw std::runtime_error("cannot open " + grid_path);
        const json grid_json = json::parse(grid_file);
        Ps = grid_json.value("P", Ps);
        hs = grid_json.value("h", hs);
        Ls = grid_json.value("L", Ls);
    }
    std::printf("seed = %llu\n", static_cast<unsigned long long>(seed));

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << "event,P,h,L,formula,simulated,standard_error\n";
    knng::Rng rng(seed);
    for (const double P : Ps)
        for (const int h : hs)
            for (const int L : Ls) {
                const knng::TreeModel model{P, h, L};
                struct Row {
                    knng::DiscoveryEvent event;
                    double formula;
                };
                const Row rows[] = {
                    {knng::DiscoveryEvent::any_tree, knng::multi_tree_prob(P, h, L)},
                    {knng::DiscoveryEvent::new_at_last_tree, knng::new_discovery_prob(P, h, L)},
                    {knng::DiscoveryEvent::propagation_path, knng::propagation_prob(P, P, h, L)},
                    {knng::DiscoveryEvent::tree_or_first_order, knng::combined_lower_bound(P, h, L)},
                };
                for (const auto& row : rows) {
                    const auto sim = knng::simulate_discovery(model, row.event, trials, rng);
                    out << to_string(row.event) << ',' << P << ',' << h << ',' << L << ',' << row.formula
                        << ',' << sim.frequency << ',' << sim.standard_error << '\n';
                }
            }
    std::printf("theory table written to %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"approximate k-NN graph construction via multiple random divisions and propagation"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic Gaussian-mixture vector file");
    knng::MixtureParams mixture;
    mixture.n = 20000;
    mixture.d = 32;
    mixture.clusters = 50;
    std::string gen_output, gen_format = "fvecs";
    gen->add_option("--n", mixture.n, "number of points");
    gen->add_option("--d", mixture.d, "dimension");
    gen->add_option("--clusters", mixture.clusters, "number of mixture components");
    gen->add_option("--sigma", mixture.cluster_sigma, "within-cluster spread");
    gen->add_option("--center-sigma", mixture.center_sigma, "spread of the cluster centers");
    gen->add_option("--seed", mixture.seed, "RNG seed");
    gen->add_option("--output", gen_output, "output vector file")->required();
    gen->add_option("--out-format", gen_format, "output format")->check(CLI::IsMember({"fvecs", "csv"}));

    // build
    auto* build = app.add_subcommand("build", "build an approximate k-NN graph");
    InputOptions build_input;
    add_input_options(build, build_input);
    knng::BuildConfig build_cfg;
    std::string build_output, build_stats_out;
    bool no_propagation = false;
    build->add_option("--k", build_cfg.k, "neighbors per point");
    build->add_option("--divisions", build_cfg.max_divisions, "maximum number of random divisions (M)");
    build->add_option("--leaf-size", build_cfg.division.max_leaf_size, "leaf cardinality bound (g)");
    build->add_option("--trigger", build_cfg.trigger_threshold,
                      "effective-rate threshold that starts propagation");
    build->add_option("--budget", build_cfg.propagation_budget,
                      "propagation visit budget (T); 0 means 100*k");
    build->add_flag("--no-propagation", no_propagation, "divisions only");
    build->add_option("--pca-sample", build_cfg.division.pca_sample,
                      "points sampled per subset for the split direction");
    build->add_option("--power-iters", build_cfg.division.power_iters,
                      "power-iteration budget for the split direction");
    build->add_option("--seed", build_cfg.division.seed, "master RNG seed");
    build->add_option("--output", build_output, "output graph file")->required();
    build->add_option("--stats-out", build_stats_out, "per-division stats CSV");

    // exact
    auto* exact = app.add_subcommand("exact", "build the exact graph by brute force");
    InputOptions exact_input;
    add_input_options(exact, exact_input);
    std::uint32_t exact_k = 10;
    std::string exact_output;
    exact->add_option("--k", exact_k, "neighbors per point");
    exact->add_option("--output", exact_output, "output graph file")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "accuracy of an approximate graph against an exact one");
    std::string eval_approx, eval_exact;
    eval->add_option("--approx", eval_approx, "approximate graph file")->required();
    eval->add_option("--exact", eval_exact, "exact graph file")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "accuracy-vs-time table over a config grid");
    InputOptions bench_input;
    add_input_options(bench, bench_input);
    std::string bench_grid, bench_out, bench_cache_dir;
    bench->add_option("--grid", bench_grid, "JSON array of build configs")->required();
    bench->add_option("--out", bench_out, "output CSV")->required();
    bench->add_option("--cache-dir", bench_cache_dir, "directory for cached exact graphs");

    // theory
    auto* theory = app.add_subcommand("theory", "discovery-probability formulas vs simulation");
    std::string theory_out, theory_grid;
    std::size_t theory_trials = 100000;
    std::uint64_t theory_seed = 0;
    theory->add_option("--out", theory_out, "output CSV")->required();
    theory->add_option("--grid", theory_grid, "JSON object with P, h, L arrays");
    theory->add_option("--trials", theory_trials, "Monte-Carlo trials per grid point");
    theory->add_option("--seed", theory_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return run_gen(gen_output, gen_format, mixture);
        if (build->parsed()) {
            build_cfg.enable_propagation = !no_propagation;
            return run_build(build_input, build_cfg, build_output, build_stats_out);
        }
        if (exact->parsed()) return run_exact(exact_input, exact_k, exact_output);
        if (eval->parsed()) return run_eval(eval_approx, eval_exact);
        if (bench->parsed()) return run_bench(bench_input, bench_grid, bench_out, bench_cache_dir);
        if (theory->parsed()) return run_theory(theory_out, theory_grid, theory_trials, theory_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
