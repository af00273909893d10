#include "prepbias/config.hpp"
#include "prepbias/csv.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace prepbias;
namespace fs = std::filesystem;

namespace {

RunManifest preset(const std::string& name) {
    return load_manifest(std::string(PREPBIAS_CONFIG_DIR) + "/" + name + ".json");
}

std::string error_of(const std::string& text) {
    try {
        parse_manifest(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

const char* kValid = R"({
  "family": "categorical_grouping",
  "params": { "num_categories": 20, "cutoff": 4, "noise_sigma": 0.25 },
  "grid": { "n": [5, 10], "m": ["n", 1] },
  "mc": { "reps": 200, "seed": 3 }
})";

std::string with(const std::string& from, const std::string& to) {
    std::string text = kValid;
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return text.replace(pos, from.size(), to);
}

int run_cli(const std::string& args) {
    const std::string command = std::string(PREPBIAS_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST(Manifest, Figure1TopLeftGrid) {
    const auto m = preset("figure1_topleft");
    ASSERT_EQ(m.grid.size(), 14u);
    std::set<std::pair<Index, Index>> pairs;
    for (const auto& point : m.grid) {
        const auto& v = std::get<VarSelConfig>(point.config.params);
        EXPECT_EQ(v.p, 100);
        EXPECT_EQ(v.scale_c, 4.0);
        EXPECT_EQ(v.big_m, 4);
        EXPECT_EQ(v.select_k, 8);
        EXPECT_EQ(v.base_dist, BaseDist::student_t4);
        EXPECT_EQ(point.config.protocol, EvalProtocol::leaky);
        pairs.emplace(v.n, v.m);
    }
    for (Index n = 15; n <= 45; n += 5) {
        EXPECT_TRUE(pairs.contains({n, n}));
        EXPECT_TRUE(pairs.contains({n, 1}));
    }
    EXPECT_EQ(m.n_reps, 10000);
}

TEST(Manifest, Figure3Grid) {
    const auto m = preset("figure3");
    std::set<double> sigmas;
    for (const auto& point : m.grid) {
        const auto& c = std::get<CategoricalConfig>(point.config.params);
        EXPECT_EQ(c.num_categories, 20);
        EXPECT_EQ(c.cutoff, 4);
        sigmas.insert(c.noise_sigma);
        EXPECT_EQ(point.extra_param, c.noise_sigma);
        EXPECT_EQ(point.p_or_c, 20.0);
    }
    EXPECT_EQ(sigmas, (std::set<double>{0.25, 1.5}));
    EXPECT_EQ(m.grid.size(), 2u * 20u * 2u);
    EXPECT_EQ(m.n_reps, 100000);
}

TEST(Manifest, Figure4LeftParams) {
    const auto m = preset("figure4_left");
    for (const auto& point : m.grid) {
        const auto& l = std::get<LassoConfig>(point.config.params);
        EXPECT_EQ(l.p, 5);
        EXPECT_EQ(l.lambda, 0.5);
        EXPECT_EQ(l.noise_sigma, 0.1);
        EXPECT_EQ(l.variant, LassoVariant::full_cd);
    }
}

TEST(Manifest, EveryPresetLoads) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(PREPBIAS_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_manifest(entry.path().string())) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 10);
}

TEST(Manifest, GridOrderIsSweepThenNThenMThenProtocol) {
    const auto m = parse_manifest(R"({
      "family": "categorical_grouping",
      "params": { "num_categories": 20, "cutoff": 4 },
      "grid": { "n": [5, 10], "m": ["n", 1], "protocol": ["leaky", "proper"], "noise_sigma": [0.25, 1.5] },
      "mc": { "reps": 10 }
    })");
    ASSERT_EQ(m.grid.size(), 16u);
    const auto& first = m.grid.front().config;
    EXPECT_EQ(std::get<CategoricalConfig>(first.params).noise_sigma, 0.25);
    EXPECT_EQ(first.n(), 5);
    EXPECT_EQ(first.m(), 5);
    EXPECT_EQ(first.protocol, EvalProtocol::leaky);
    EXPECT_EQ(m.grid[1].config.protocol, EvalProtocol::proper);
    EXPECT_EQ(m.grid[2].config.m(), 1);
    EXPECT_EQ(m.grid[4].config.n(), 10);
    EXPECT_EQ(std::get<CategoricalConfig>(m.grid[8].config.params).noise_sigma, 1.5);
    EXPECT_EQ(m.seed, 1u);
    EXPECT_EQ(m.name, "categorical_grouping");
    EXPECT_EQ(m.output_path, "categorical_grouping.csv");
}

TEST(Manifest, UnknownKeysAreNamed) {
    EXPECT_NE(error_of(with("\"mc\"", "\"typo\": 1, \"mc\"")).find("config.typo: unknown key"), std::string::npos);
    EXPECT_NE(error_of(with("\"cutoff\"", "\"cutof\"")).find("params.cutof: unknown key"), std::string::npos);
    EXPECT_NE(error_of(with("\"m\":", "\"mm\":")).find("grid.mm: unknown key"), std::string::npos);
    EXPECT_NE(error_of(with("\"seed\"", "\"sead\"")).find("mc.sead: unknown key"), std::string::npos);
    EXPECT_NE(error_of(with("\"mc\"", "\"output\": {\"file\": \"x\"}, \"mc\"")).find("output.file: unknown key"),
              std::string::npos);
    // a key of another family is still unknown
    EXPECT_NE(error_of(with("\"cutoff\": 4", "\"cutoff\": 4, \"lambda\": 1")).find("params.lambda"),
              std::string::npos);
}

TEST(Manifest, TypesAndRangesAreChecked) {
    EXPECT_NE(error_of(with("\"cutoff\": 4", "\"cutoff\": \"four\"")).find("params.cutoff"), std::string::npos);
    EXPECT_NE(error_of(with("\"cutoff\": 4", "\"cutoff\": 2.5")).find("params.cutoff"), std::string::npos);
    EXPECT_NE(error_of(with("\"cutoff\": 4", "\"cutoff\": 0")).find("cutoff"), std::string::npos);
    EXPECT_NE(error_of(with("\"noise_sigma\": 0.25", "\"noise_sigma\": -1")).find("noise_sigma"), std::string::npos);
    EXPECT_NE(error_of(with("\"reps\": 200", "\"reps\": 1")).find("mc.reps"), std::string::npos);
    EXPECT_NE(error_of(with("\"seed\": 3", "\"seed\": -3")).find("mc.seed"), std::string::npos);
    EXPECT_NE(error_of(with("[5, 10]", "[]")).find("grid.n"), std::string::npos);
    EXPECT_NE(error_of(with("[5, 10]", "[0]")).find("grid.n"), std::string::npos);
    EXPECT_NE(error_of(with("[\"n\", 1]", "[\"x\"]")).find("grid.m"), std::string::npos);
    EXPECT_NE(error_of(with("\"categorical_grouping\"", "\"categorical\"")).find("family"), std::string::npos);
    EXPECT_NE(error_of("{ not json").find("parse error"), std::string::npos);
    EXPECT_NE(error_of(with("\"noise_sigma\": 0.25 }", "\"noise_sigma\": 0.25 }, \"name\": 5"))
                  .find("name: expected a string"),
              std::string::npos);
}

TEST(Manifest, SweepAndFixedConflict) {
    EXPECT_NE(error_of(with("\"m\": [\"n\", 1]", "\"m\": [1], \"cutoff\": [2, 4]")).find("grid.cutoff"),
              std::string::npos);
}

TEST(Manifest, FamilySpecificValidation) {
    const std::string bad_select = R"({
      "family": "varsel_linreg",
      "params": { "p": 10, "big_m": 2, "scale_c": 4, "select_k": 11 },
      "grid": { "n": [10], "m": [1] }, "mc": { "reps": 10 } })";
    EXPECT_NE(error_of(bad_select).find("select_k"), std::string::npos);
    const std::string bad_variant = R"({
      "family": "rescaled_lasso",
      "params": { "p": 5, "lambda": 0.5, "noise_sigma": 0.1, "variant": "fast" },
      "grid": { "n": [10], "m": [1] }, "mc": { "reps": 10 } })";
    EXPECT_NE(error_of(bad_variant).find("params.variant"), std::string::npos);
    const std::string bad_x0 = R"({
      "family": "pathological", "params": { "x0": [0, 1] },
      "grid": { "n": [10], "m": [1] }, "mc": { "reps": 10 } })";
    EXPECT_NE(error_of(bad_x0).find("x0"), std::string::npos);
}

TEST(Csv, HeaderOrder) {
    std::ostringstream out;
    write_csv_header(out);
    EXPECT_EQ(out.str(),
              "experiment,protocol,n,m,p_or_C,extra_param,n_reps,seed,e_val_mean,e_val_se,e_gen_mean,e_gen_se,"
              "bias_mean,bias_se,null_error,nonconverged_count\n");
}

TEST(Csv, RowFormat) {
    const auto m = parse_manifest(kValid);
    BiasEstimate est;
    est.bias_mean = -0.125;
    est.bias_se = 1.0 / 3.0;
    est.e_val_mean = 2.0;
    est.e_gen_mean = 2.125;
    est.null_mean = 1.25;
    est.n_reps = 200;
    est.master_seed = 3;
    est.nonconverged_count = 0;
    std::ostringstream out;
    write_csv_row(out, m.name, m.grid.front(), est);
    EXPECT_EQ(out.str(), "categorical_grouping,leaky,5,5,20,0.25,200,3,2,0,2.125,0,-0.125,0.3333333333,1.25,0\n");
}

TEST(Csv, RepeatedRunsAreByteIdentical) {
    const fs::path dir = fs::temp_directory_path() / "prepbias_csv_test";
    fs::create_directories(dir);
    const fs::path config = dir / "grid.json";
    {
        std::ofstream out(config);
        out << kValid;
    }
    const fs::path a = dir / "a.csv", b = dir / "b.csv";
    ASSERT_EQ(run_cli("run --config " + config.string() + " --out " + a.string() + " --threads 1 -q"), 0);
    ASSERT_EQ(run_cli("run --config " + config.string() + " --out " + b.string() + " --threads 3 -q"), 0);
    const std::string first = slurp(a);
    EXPECT_EQ(first, slurp(b));
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 5);
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("list-figures"), 0);
    EXPECT_EQ(run_cli("run --config " + std::string(PREPBIAS_TEST_DATA) + "/bad_key.json"), 1);
    EXPECT_EQ(run_cli("run --config does_not_exist"), 1);
    EXPECT_EQ(run_cli("run pathological --reps 1 --out -"), 1);
    EXPECT_EQ(run_cli("verify nosuch"), 1);
    EXPECT_EQ(run_cli("frobnicate"), 1);
    EXPECT_EQ(run_cli("verify pathological --reps 500"), 0);
    EXPECT_EQ(run_cli("verify eq31 --reps 2"), 2);
}
