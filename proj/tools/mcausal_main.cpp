// Command-line harness: simulation grids, landmark-data analysis, the
// regression-equivalence check, and the nested-estimator counterexample.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mcausal/errors.hpp"
#include "mcausal/harness.hpp"

namespace {

using mcausal::Json;

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw mcausal::IngestError("cannot open config file " + path);
    Json j;
    in >> j;
    return j;
}

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string alpha;
    std::optional<int> replicates;
    std::optional<int> bootstrap;
    std::optional<int> permutations;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--seed", flags.seed, "RNG seed (overrides the config)");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--alpha", flags.alpha, "estimator selection: 1, 2, or both")
        ->check(CLI::IsMember({"1", "2", "both"}));
    cmd->add_option("--replicates", flags.replicates, "replicate count");
    cmd->add_option("--bootstrap", flags.bootstrap, "bootstrap resample count");
    cmd->add_option("--permutations", flags.permutations, "randomization test draws");
}

Json merged_config(const CommonFlags& flags) {
    Json j = load_config(flags.config_path);
    if (flags.seed) j["seed"] = *flags.seed;
    if (!flags.out_dir.empty()) j["out"] = flags.out_dir;
    if (!flags.alpha.empty()) j["alpha"] = flags.alpha;
    if (flags.replicates) j["replicates"] = *flags.replicates;
    if (flags.bootstrap) j["bootstrap"] = *flags.bootstrap;
    if (flags.permutations) j["permutations"] = *flags.permutations;
    return j;
}

void print_summary(const Json& report) {
    const std::string command = report.at("command").get<std::string>();
    std::cout << command << " done (config " << report.at("config_hash").get<std::string>()
              << ", seed " << report.at("seed") << ")\n";
    if (command == "simulate") {
        for (const auto& cell : report.at("results")) {
            std::cout << "  type " << cell.at("experiment_type") << " "
                      << cell.at("estimator").get<std::string>() << " n=" << cell.at("n")
                      << " mae=" << cell.at("mae");
            if (cell.contains("coverage")) std::cout << " coverage=" << cell.at("coverage");
            std::cout << "\n";
        }
    } else if (command == "analyze") {
        for (const auto& cell : report.at("results")) {
            std::cout << "  " << cell.at("estimator").get<std::string>() << " = "
                      << cell.at("estimate") << "  CI [" << cell.at("interval_lower") << ", "
                      << cell.at("interval_upper") << "]  p = " << cell.at("p_value") << "\n";
        }
        if (report.contains("euclidean_baseline")) {
            for (const auto& cell : report.at("euclidean_baseline")) {
                std::cout << "  baseline " << cell.at("estimator").get<std::string>() << " = "
                          << cell.at("estimate") << "  p = " << cell.at("p_value") << "\n";
            }
        }
    } else if (command == "theorem1") {
        std::cout << "  max gap " << report.at("max_gap") << ", beta spread "
                  << report.at("max_beta_spread") << " -> "
                  << (report.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
    } else if (command == "example1") {
        const auto& r = report.at("results");
        std::cout << "  mean T2 " << r.at("mean_t2") << ", nested " << r.at("mean_nested")
                  << " (limit " << r.at("nested_limit") << ") -> "
                  << (report.at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal effect estimation on metric spaces"};
    app.require_subcommand(1);

    CommonFlags simulate_flags, analyze_flags, theorem_flags, example_flags;
    bool euclidean_baseline = false;

    CLI::App* simulate = app.add_subcommand("simulate", "run a simulation scenario grid");
    add_common(simulate, simulate_flags);

    CLI::App* analyze =
        app.add_subcommand("analyze", "estimate effects on landmark data from CSV files");
    add_common(analyze, analyze_flags);
    analyze->add_flag("--euclidean-baseline", euclidean_baseline,
                      "also analyze the flattened coordinates");

    CLI::App* theorem1 = app.add_subcommand(
        "theorem1", "check that the regression route matches the center-distance route");
    add_common(theorem1, theorem_flags);

    CLI::App* example1 = app.add_subcommand(
        "example1", "run the configuration where the nested estimator is inconsistent");
    add_common(example1, example_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        Json report;
        if (simulate->parsed()) {
            report = mcausal::run_simulate(
                mcausal::parse_simulate_config(merged_config(simulate_flags)));
        } else if (analyze->parsed()) {
            Json j = merged_config(analyze_flags);
            if (euclidean_baseline) j["euclidean_baseline"] = true;
            report = mcausal::run_analyze(mcausal::parse_analyze_config(j));
        } else if (theorem1->parsed()) {
            report = mcausal::run_equivalence(
                mcausal::parse_equivalence_config(merged_config(theorem_flags)));
        } else if (example1->parsed()) {
            report = mcausal::run_example1(
                mcausal::parse_example1_config(merged_config(example_flags)));
        }
        print_summary(report);
        if (report.contains("pass") && !report.at("pass").get<bool>()) return 2;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
