// Command-line front end: `sweep` runs the (alpha, rho) grid experiment and
// writes CSV plus a JSON metadata sidecar, `validate` cross-checks the closed
// forms against the Monte-Carlo estimators, `single` dumps one realization.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime or numerical failure.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ramimo/ramimo.hpp"

namespace {

struct SweepArgs {
    std::string config_path;
    std::string out_override;
    int threads = 0;
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
};

struct ValidateArgs {
    std::string config_path;
    std::optional<std::size_t> samples;
    bool quiet = false;
};

struct SingleArgs {
    std::string config_path;
    std::uint64_t index = 0;
    bool quiet = false;
};

int run_sweep_command(const SweepArgs& args) {
    ramimo::RunConfig config = ramimo::parse_config_file(args.config_path);
    if (!args.out_override.empty()) config.out_dir = args.out_override;
    if (args.seed_override) config.seed = *args.seed_override;

    ramimo::SweepSpec spec = ramimo::to_sweep_spec(config, args.threads);
    ramimo::ProgressFn progress;
    if (!args.quiet)
        progress = [](int done, int total) {
            std::cerr << "\rrealization " << done << "/" << total << std::flush;
            if (done == total) std::cerr << "\n";
        };

    const auto start = std::chrono::steady_clock::now();
    const ramimo::SweepResult result = ramimo::run_sweep(spec, progress);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::filesystem::path out_dir(config.out_dir);
    const auto csv_path = out_dir / config.csv_name;
    const auto sidecar_path = out_dir / config.sidecar_name;
    ramimo::write_text_file(csv_path, ramimo::sweep_result_csv(result));
    ramimo::write_text_file(sidecar_path,
                            ramimo::sweep_sidecar_json(config, result, wall).dump(2) + "\n");
    if (!args.quiet)
        std::cerr << "wrote " << csv_path.string() << " and " << sidecar_path.string() << " in "
                  << wall << " s\n";
    return 0;
}

int run_validate_command(const ValidateArgs& args) {
    const ramimo::RunConfig config = ramimo::parse_config_file(args.config_path);
    ramimo::ValidationOptions options;
    options.samples_override = args.samples;
    if (!args.quiet) std::cerr << "running validation (this draws many Monte-Carlo samples)\n";
    const ramimo::ValidationReport report = ramimo::run_validation(config, options);
    std::cout << ramimo::validation_report_text(report);
    const auto json_path = std::filesystem::path(config.out_dir) / "validation.json";
    ramimo::write_text_file(json_path, ramimo::validation_report_json(report).dump(2) + "\n");
    if (!args.quiet) std::cerr << "wrote " << json_path.string() << "\n";
    return report.all_pass() ? 0 : 2;
}

int run_single_command(const SingleArgs& args) {
    const ramimo::RunConfig config = ramimo::parse_config_file(args.config_path);
    const nlohmann::json dump = ramimo::realization_dump_json(config, args.index);
    const auto path = std::filesystem::path(config.out_dir) /
                      ("single_" + std::to_string(args.index) + ".json");
    ramimo::write_text_file(path, dump.dump(2) + "\n");
    if (!args.quiet) std::cerr << "wrote " << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"repeater-assisted massive MIMO uplink simulator"};
    app.require_subcommand(1);

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "run the (alpha, rho) sweep experiment");
    sweep->add_option("--config", sweep_args.config_path, "config file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_args.out_override, "output directory override");
    sweep->add_option("--threads", sweep_args.threads, "worker threads (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    sweep->add_option("--seed", sweep_args.seed_override, "master seed override");
    sweep->add_flag("--quiet", sweep_args.quiet, "suppress progress output");

    ValidateArgs validate_args;
    CLI::App* validate =
        app.add_subcommand("validate", "check closed forms against Monte-Carlo estimates");
    validate->add_option("--config", validate_args.config_path, "config file")
        ->required()
        ->check(CLI::ExistingFile);
    validate->add_option("--samples", validate_args.samples,
                         "sample count override for every estimator");
    validate->add_flag("--quiet", validate_args.quiet, "suppress progress output");

    SingleArgs single_args;
    CLI::App* single = app.add_subcommand("single", "dump one channel realization as JSON");
    single->add_option("--config", single_args.config_path, "config file")
        ->required()
        ->check(CLI::ExistingFile);
    single->add_option("--index", single_args.index, "realization index")->required();
    single->add_flag("--quiet", single_args.quiet, "suppress progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) return run_sweep_command(sweep_args);
        if (validate->parsed()) return run_validate_command(validate_args);
        if (single->parsed()) return run_single_command(single_args);
    } catch (const ramimo::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
