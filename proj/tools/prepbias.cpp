#include "prepbias/config.hpp"
#include "prepbias/csv.hpp"
#include "prepbias/mc_engine.hpp"
#include "prepbias/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace prepbias;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitVerifyFailed = 2;

fs::path config_dir() {
    if (const char* env = std::getenv("PREPBIAS_CONFIG_DIR")) return env;
    return PREPBIAS_CONFIG_DIR;
}

// A path that exists is used as is; otherwise a bare name is looked up among the presets.
fs::path resolve_config(const std::string& arg) {
    const fs::path direct(arg);
    if (fs::exists(direct)) return direct;
    fs::path preset = config_dir() / arg;
    if (preset.extension() != ".json") preset += ".json";
    if (fs::exists(preset)) return preset;
    throw ConfigError("config: '" + arg + "' is neither a file nor a preset in " + config_dir().string());
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(config_dir(), ec))
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

struct RunArgs {
    std::string config;
    std::int64_t reps = 0;
    std::int64_t seed = -1;
    unsigned threads = default_thread_count();
    std::string out;
    bool quiet = false;
};

int cmd_run(const RunArgs& args) {
    RunManifest manifest = load_manifest(resolve_config(args.config).string());
    if (args.reps != 0) {
        if (args.reps < 2) throw ConfigError("--reps: must be >= 2");
        manifest.n_reps = args.reps;
    }
    if (args.seed >= 0) manifest.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out.empty()) manifest.output_path = args.out;

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (manifest.output_path != "-") {
        file.open(manifest.output_path, std::ios::trunc);
        if (!file) throw ConfigError("output.path: cannot write '" + manifest.output_path + "'");
        out = &file;
    }
    write_csv_header(*out);
    const auto total = manifest.grid.size();
    for (std::size_t i = 0; i < total; ++i) {
        const auto& point = manifest.grid[i];
        const auto est = run_replicates(point.config, manifest.n_reps, manifest.seed, args.threads);
        write_csv_row(*out, manifest.name, point, est);
        out->flush();
        if (!args.quiet)
            std::cerr << "[" << i + 1 << "/" << total << "] " << protocol_name(point.config.protocol)
                      << " n=" << point.config.n() << " m=" << point.config.m()
                      << " bias=" << format_number(est.bias_mean) << " se=" << format_number(est.bias_se) << '\n';
        if (!est.healthy())
            std::cerr << "warning: " << est.nonconverged_count << " of " << est.n_reps
                      << " replicates did not converge\n";
    }
    if (manifest.output_path != "-" && !args.quiet) std::cerr << "wrote " << manifest.output_path << '\n';
    return kExitOk;
}

int cmd_verify(const std::string& suite, const VerifyOptions& opt) {
    const auto& suites = verify_suites();
    std::vector<std::string> names;
    if (suite == "all") {
        for (const auto& [name, fn] : suites) names.push_back(name);
    } else if (suites.contains(suite)) {
        names.push_back(suite);
    } else {
        std::string known;
        for (const auto& [name, fn] : suites) known += " " + name;
        throw ConfigError("suite: unknown suite '" + suite + "' (known:" + known + " all)");
    }
    bool all_pass = true;
    for (const auto& name : names) {
        const auto report = suites.at(name)(opt);
        std::cout << report.suite << '\n';
        for (const auto& check : report.checks) print_check(std::cout, check);
        std::cout << report.suite << ": " << (report.passed() ? "PASS" : "FAIL") << '\n';
        all_pass = all_pass && report.passed();
    }
    return all_pass ? kExitOk : kExitVerifyFailed;
}

int cmd_list_figures() {
    for (const auto& name : preset_names()) {
        try {
            const auto manifest = load_manifest((config_dir() / (name + ".json")).string());
            std::cout << name << "  " << family_name(manifest.grid.front().config.family()) << "  "
                      << manifest.grid.size() << " grid points, " << manifest.n_reps << " reps\n";
        } catch (const std::exception& e) {
            std::cout << name << "  (invalid: " << e.what() << ")\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo estimates of cross-validation bias from unsupervised preprocessing"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run an experiment grid and write one CSV row per grid point");
    run->add_option("config_name", run_args.config, "Preset name (see list-figures) or config path");
    run->add_option("--config", run_args.config, "Config path or preset name");
    run->add_option("--reps", run_args.reps, "Replicates per grid point (overrides mc.reps)");
    run->add_option("--seed", run_args.seed, "Master seed (overrides mc.seed)")->check(CLI::NonNegativeNumber);
    run->add_option("--threads", run_args.threads, "Worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", run_args.out, "CSV output path, '-' for stdout (overrides output.path)");
    run->add_flag("-q,--quiet", run_args.quiet, "No progress counter");

    std::string suite;
    VerifyOptions verify_opt;
    std::int64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "Check Monte Carlo estimates against the closed-form oracles");
    verify->add_option("suite", suite, "eq31, thm2, thm3, thm4, pathological, proper_unbiased, kfold or all")
        ->required();
    verify->add_option("--reps", verify_opt.reps, "Replicates per check (default: per suite)");
    verify->add_option("--seed", verify_seed, "Master seed")->check(CLI::NonNegativeNumber);
    verify->add_option("--threads", verify_opt.threads, "Worker threads")->check(CLI::PositiveNumber);

    app.add_subcommand("list-figures", "List the experiment presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*run) {
            if (run_args.config.empty()) throw ConfigError("run: --config or a preset name is required");
            return cmd_run(run_args);
        }
        if (*verify) {
            if (verify_opt.reps != 0 && verify_opt.reps < 2) throw ConfigError("--reps: must be >= 2");
            verify_opt.seed = static_cast<std::uint64_t>(verify_seed);
            return cmd_verify(suite, verify_opt);
        }
        return cmd_list_figures();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}
