#include "risloc/sweep.hpp"
#include "risloc/version.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

namespace fs = std::filesystem;

void write_outputs(const std::string& out_dir, const std::string& csv,
                   const risloc::RunManifest& manifest) {
    fs::create_directories(out_dir);
    {
        std::ofstream f(fs::path(out_dir) / "results.csv", std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + out_dir + "/results.csv");
        f << csv;
    }
    {
        std::ofstream f(fs::path(out_dir) / "manifest.txt", std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write " + out_dir + "/manifest.txt");
        f << manifest.to_text();
    }
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir{"out"};
    std::uint64_t seed{0};
    bool seed_set{false};
    int threads{-1};
    std::string signaling;
    bool no_ris{false};
};

risloc::ScenarioConfig load_config(const CommonOpts& opts) {
    risloc::ScenarioConfig config = risloc::ScenarioConfig::from_file(opts.config_path);
    if (opts.seed_set)
        config.seed = opts.seed;
    if (opts.threads >= 0)
        config.threads = opts.threads;
    if (!opts.signaling.empty())
        config.bounds.signaling = risloc::signaling_from_string(opts.signaling);
    if (opts.no_ris)
        config.use_ris = false;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("config", opts.config_path, "scenario config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the config seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
    cmd->add_option("--signaling", opts.signaling, "override signaling: sync|async");
    cmd->add_flag("--no-ris", opts.no_ris, "disable the reflected path");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localization error bounds and RIS phase design for single-anchor near-field "
                 "systems"};
    app.set_version_flag("--version", risloc::version_string);
    app.require_subcommand(1);

    CommonOpts run_opts, compare_opts, mle_opts, validate_opts;
    std::string strategies_arg{"mirror,random,proposed,optimized_crlb,quantized"};
    int trials = 0;

    CLI::App* run_cmd = app.add_subcommand("run", "evaluate bounds over the configured sweep");
    add_common(run_cmd, run_opts);

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "evaluate several phase strategies on the same sweep");
    add_common(compare_cmd, compare_opts);
    compare_cmd->add_option("--strategies", strategies_arg, "comma-separated strategy list");

    CLI::App* mle_cmd = app.add_subcommand("mle", "Monte Carlo MLE validation against the bound");
    add_common(mle_cmd, mle_opts);
    mle_cmd->add_option("--trials", trials, "number of Monte Carlo trials");

    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a config file");
    add_common(validate_cmd, validate_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto config = load_config(run_opts);
            const risloc::SweepResult result = risloc::run_sweep(config);
            write_outputs(run_opts.out_dir, result.csv, result.manifest);
            std::cout << "rows=" << result.manifest.rows << " warnings="
                      << result.manifest.warnings.size() << " out=" << run_opts.out_dir << "\n";
        } else if (compare_cmd->parsed()) {
            const auto config = load_config(compare_opts);
            std::vector<risloc::PhaseStrategy> strategies;
            std::stringstream ss(strategies_arg);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty())
                    strategies.push_back(risloc::phase_strategy_from_string(item));
            const risloc::SweepResult result = risloc::compare_strategies(config, strategies);
            write_outputs(compare_opts.out_dir, result.csv, result.manifest);
            std::cout << "rows=" << result.manifest.rows << " warnings="
                      << result.manifest.warnings.size() << " out=" << compare_opts.out_dir
                      << "\n";
        } else if (mle_cmd->parsed()) {
            const auto config = load_config(mle_opts);
            const risloc::MleRunResult result = risloc::run_mle(config, trials);
            write_outputs(mle_opts.out_dir, result.csv, result.manifest);
            std::cout << "trials=" << result.trials
                      << " rmse_pos_m=" << risloc::format_number(result.rmse_position_m)
                      << " peb_m=" << risloc::format_number(result.peb_m)
                      << " snr_db=" << risloc::format_number(result.effective_snr_db) << "\n";
        } else if (validate_cmd->parsed()) {
            const auto config = load_config(validate_opts);
            std::cout << "ok config_hash=" << std::hex << config.config_hash() << std::dec << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: {\"message\": \"" << e.what() << "\"}" << std::endl;
        return 1;
    }
    return 0;
}
