#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef KNNG_CLI_PATH
#error "KNNG_CLI_PATH must point at the CLI binary"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

struct CliFixture {
    std::filesystem::path dir;

    CliFixture() {
        dir = std::filesystem::temp_directory_path() / "knng_cli_test";
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~CliFixture() { std::filesystem::remove_all(dir); }

    std::string file(const std::string& name) const { return (dir / name).string(); }

    RunResult run(const std::string& args) const {
        const auto log = file("run.log");
        const std::string cmd = std::string(KNNG_CLI_PATH) + " " + args + " > " + log + " 2>&1";
        const int raw = std::system(cmd.c_str());
        std::ifstream in(log);
        std::stringstream captured;
        captured << in.rdbuf();
        return {WEXITSTATUS(raw), captured.str()};
    }
};

std::vector<unsigned char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    return lines;
}

}  // namespace

TEST_CASE("exact then eval of a graph against itself prints accuracy 1.000000") {
    CliFixture cli;
    REQUIRE(cli.run("gen --n 300 --d 8 --clusters 4 --seed 7 --output " + cli.file("v.fvecs")).exit_code == 0);
    REQUIRE(cli.run("exact --input " + cli.file("v.fvecs") + " --k 5 --output " + cli.file("exact.knng"))
                .exit_code == 0);
    const auto eval = cli.run("eval --approx " + cli.file("exact.knng") + " --exact " + cli.file("exact.knng"));
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.find("accuracy 1.000000") != std::string::npos);
}

TEST_CASE("a single all-containing division without propagation is exact end to end") {
    CliFixture cli;
    REQUIRE(cli.run("gen --n 250 --d 6 --clusters 3 --seed 8 --output " + cli.file("v.fvecs")).exit_code == 0);
    REQUIRE(cli.run("exact --input " + cli.file("v.fvecs") + " --k 4 --output " + cli.file("exact.knng"))
                .exit_code == 0);
    REQUIRE(cli.run("build --input " + cli.file("v.fvecs") +
                    " --k 4 --divisions 1 --leaf-size 251 --no-propagation --seed 5 --output " +
                    cli.file("approx.knng"))
                .exit_code == 0);
    const auto eval = cli.run("eval --approx " + cli.file("approx.knng") + " --exact " + cli.file("exact.knng"));
    CHECK(eval.exit_code == 0);
    CHECK(eval.output.find("accuracy 1.000000") != std::string::npos);
}

TEST_CASE("builds print the seed and reproduce bit-identical graph files") {
    CliFixture cli;
    REQUIRE(cli.run("gen --n 400 --d 8 --clusters 4 --seed 9 --output " + cli.file("v.fvecs")).exit_code == 0);
    const std::string build_args = "build --input " + cli.file("v.fvecs") +
                                   " --k 6 --divisions 4 --leaf-size 64 --seed 31337 --stats-out " +
                                   cli.file("stats.csv") + " --output ";
    const auto first = cli.run(build_args + cli.file("a.knng"));
    REQUIRE(first.exit_code == 0);
    CHECK(first.output.find("seed = 31337") != std::string::npos);
    REQUIRE(cli.run(build_args + cli.file("b.knng")).exit_code == 0);
    CHECK(read_bytes(cli.file("a.knng")) == read_bytes(cli.file("b.knng")));

    // stats CSV: header plus one row per division that ran
    std::ifstream stats(cli.file("stats.csv"));
    std::string header;
    std::getline(stats, header);
    CHECK(header == "division,new_pairs,cumulative_pairs,effective_rate,distance_computations,wall_time_s");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(stats, line))
        if (!line.empty()) ++rows;
    CHECK(rows >= 1);
    CHECK(rows <= 4);
}

TEST_CASE("usage errors exit with code 2") {
    CliFixture cli;
    CHECK(cli.run("build --no-such-flag").exit_code == 2);
    CHECK(cli.run("unknown-subcommand").exit_code == 2);
    CHECK(cli.run("eval --approx only.knng").exit_code == 2);  // missing required --exact
}

TEST_CASE("runtime failures exit with code 1 and a diagnostic") {
    CliFixture cli;
    const auto missing = cli.run("exact --input " + cli.file("absent.fvecs") + " --k 3 --output " +
                                 cli.file("out.knng"));
    CHECK(missing.exit_code == 1);
    CHECK(missing.output.find("error:") != std::string::npos);

    // digest mismatch between graphs from different datasets
    REQUIRE(cli.run("gen --n 100 --d 4 --clusters 2 --seed 1 --output " + cli.file("a.fvecs")).exit_code == 0);
    REQUIRE(cli.run("gen --n 100 --d 4 --clusters 2 --seed 2 --output " + cli.file("b.fvecs")).exit_code == 0);
    REQUIRE(cli.run("exact --input " + cli.file("a.fvecs") + " --k 3 --output " + cli.file("a.knng"))
                .exit_code == 0);
    REQUIRE(cli.run("exact --input " + cli.file("b.fvecs") + " --k 3 --output " + cli.file("b.knng"))
                .exit_code == 0);
    const auto mismatch = cli.run("eval --approx " + cli.file("a.knng") + " --exact " + cli.file("b.knng"));
    CHECK(mismatch.exit_code == 1);
    CHECK(mismatch.output.find("digest") != std::string::npos);
}

TEST_CASE("bench emits the documented CSV") {
    CliFixture cli;
    REQUIRE(cli.run("gen --n 500 --d 8 --clusters 4 --seed 3 --output " + cli.file("v.fvecs")).exit_code == 0);
    std::ofstream(cli.file("grid.json"))
        << R"([{"k": 5, "divisions": 2, "no_propagation": true, "leaf_size": 64, "seed": 1},
               {"k": 5, "divisions": 4, "leaf_size": 64, "seed": 1}])";
    const auto bench = cli.run("bench --input " + cli.file("v.fvecs") + " --grid " + cli.file("grid.json") +
                               " --out " + cli.file("bench.csv"));
    REQUIRE(bench.exit_code == 0);
    std::ifstream out(cli.file("bench.csv"));
    std::string header;
    std::getline(out, header);
    CHECK(header == "config_id,M,T,trigger,k,seconds,accuracy");
    CHECK(count_lines(cli.file("bench.csv")) == 3);
}

TEST_CASE("theory emits formula-vs-simulation rows") {
    CliFixture cli;
    std::ofstream(cli.file("grid.json")) << R"({"P": [0.8], "h": [2], "L": [3]})";
    const auto theory = cli.run("theory --out " + cli.file("theory.csv") + " --grid " +
                                cli.file("grid.json") + " --trials 2000 --seed 4");
    REQUIRE(theory.exit_code == 0);
    CHECK(theory.output.find("seed = 4") != std::string::npos);
    std::ifstream out(cli.file("theory.csv"));
    std::string header;
    std::getline(out, header);
    CHECK(header == "event,P,h,L,formula,simulated,standard_error");
    CHECK(count_lines(cli.file("theory.csv")) == 5);  // header + 4 events
}

TEST_CASE("csv input works through the CLI") {
    CliFixture cli;
    std::ofstream(cli.file("v.csv")) << "0.0,0.0\n1.0,0.0\n0.0,1.0\n5.0,5.0\n";
    REQUIRE(cli.run("exact --input " + cli.file("v.csv") + " --format csv --k 2 --output " +
                    cli.file("exact.knng"))
                .exit_code == 0);
    const auto eval = cli.run("eval --approx " + cli.file("exact.knng") + " --exact " + cli.file("exact.knng"));
    CHECK(eval.output.find("accuracy 1.000000") != std::string::npos);
}
