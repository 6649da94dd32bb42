// marketfc: generate synthetic corpora, validate experiment configs and run
// forecasting benchmarks.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration error,
// 3 data error, 4 training divergence.

#include "marketfc/error.hpp"
#include "marketfc/experiment.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace {

using marketfc::Error;
using marketfc::ErrorCode;
namespace experiment = marketfc::experiment;

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kDivergence = 4 };

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_config:
        case ErrorCode::invalid_argument:
            return kConfigError;
        case ErrorCode::file_not_found:
        case ErrorCode::missing_column:
        case ErrorCode::empty_after_cleaning:
        case ErrorCode::out_of_bounds:
        case ErrorCode::series_too_short:
        case ErrorCode::insufficient_history:
        case ErrorCode::io:
            return kDataError;
        case ErrorCode::gradient_explosion:
            return kDivergence;
        default:
            return kFailure;
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct Options {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string models;
    std::string regimes;
};

experiment::ExperimentConfig resolve(const Options& opts) {
    auto config = experiment::load_config(opts.config_path);
    if (opts.seed_set) config.seed = opts.seed;
    if (!opts.models.empty()) config.models = split_list(opts.models);
    if (!opts.regimes.empty()) config.regimes = split_list(opts.regimes);
    if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
    return config;
}

void report_error(const Error& e) {
    std::cerr << "error [" << marketfc::to_string(e.code()) << "]";
    if (e.code() == ErrorCode::gradient_explosion) std::cerr << " training diverged (exploding gradients)";
    std::cerr << ": " << e.what() << "\n";
}

int cmd_generate(const Options& opts) {
    const auto config = resolve(opts);
    const auto result = experiment::run_generate(config, config.output_dir);
    std::cout << "wrote " << result.files.size() << " series and " << result.manifest.string() << "\n";
    return kOk;
}

int cmd_validate(const Options& opts) {
    const auto config = resolve(opts);
    const auto problems = experiment::validate(config, true);
    if (!problems.empty()) {
        std::cout << "invalid (" << problems.size() << " violation" << (problems.size() == 1 ? "" : "s") << "):\n";
        for (const auto& p : problems) std::cout << "  - " << p << "\n";
        return kConfigError;
    }
    std::cout << "ok\n" << experiment::to_json(config).dump(2) << "\n";
    std::cout << "config_hash " << experiment::config_hash(config) << "\n";
    return kOk;
}

int cmd_benchmark(const Options& opts) {
    const auto config = resolve(opts);
    const auto result = experiment::run_benchmark(config, config.output_dir);
    std::cout << result.table;
    std::cout << "reports written to " << config.output_dir << " (config_hash "
              << result.report.config_hash << ", seed " << result.report.seed << ")\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic market generation and forecasting benchmark"};
    app.require_subcommand(1);

    Options opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "Output directory (overrides config output_dir)");
        sub->add_option("--seed", opts.seed, "Root seed (overrides config seed)")
            ->each([&](const std::string&) { opts.seed_set = true; });
        sub->add_option("--models", opts.models, "Comma-separated model filter (arima,mlp,persistence,oracle)");
        sub->add_option("--regimes", opts.regimes, "Comma-separated regime filter (normal,augmented,meta)");
    };
    auto* generate = app.add_subcommand("generate", "Write a synthetic corpus and its manifest");
    auto* benchmark = app.add_subcommand("benchmark", "Train, evaluate and write report.csv/report.json");
    auto* validate = app.add_subcommand("validate", "Check a config and print the effective settings");
    add_common(generate);
    add_common(benchmark);
    add_common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (generate->parsed()) return cmd_generate(opts);
        if (benchmark->parsed()) return cmd_benchmark(opts);
        if (validate->parsed()) return cmd_validate(opts);
    } catch (const Error& e) {
        report_error(e);
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
