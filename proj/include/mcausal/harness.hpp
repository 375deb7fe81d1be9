#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcausal/estimands.hpp"

namespace mcausal {

using Json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "0.1.0";

// Settings for the `simulate` command: a grid of scenario cells.
struct SimulateConfig {
    int scenario = 1;
    std::vector<int> n_values;
    int replicates = 100;
    double sigma2 = 0.0;  // 0 -> (pi/8)^2
    std::vector<int> alphas{2, 1};
    int bootstrap_b = 500;       // used by scenarios 2 and 4
    int permutations = 0;        // optional randomization test per replicate
    double level = 0.95;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string lambda_policy = "default";  // default | known | empirical
    double caliper = 0.2;        // scenarios 3-4
    std::string out_dir = ".";
    int threads = 0;  // 0 -> default_thread_count()
};

struct AnalyzeConfig {
    std::string units_csv;
    std::string outcomes_csv;
    std::vector<int> alphas{2, 1};
    double caliper = 0.2;
    int bootstrap_b = 500;
    int permutations = 999;
    double level = 0.95;
    std::uint64_t seed = 20240808;
    bool euclidean_baseline = false;
    std::string out_dir = ".";
    int threads = 0;
};

struct EquivalenceConfig {
    std::string manifold = "sphere2";  // sphere2 | hyperbolic2 | euclidean3
    int n_units = 40;
    int datasets = 5;
    std::vector<int> alphas{2, 1};
    std::vector<double> betas{0.5, 0.3, 0.7};
    double tolerance = 1e-4;
    std::uint64_t seed = 20240808;
    std::string out_dir = ".";
};

struct Example1Config {
    double c = 0.7853981633974483;  // pi/4
    int n_units = 3000;
    int replicates = 5;
    std::uint64_t seed = 20240808;
    std::string out_dir = ".";
    int threads = 0;
};

SimulateConfig parse_simulate_config(const Json& j);
AnalyzeConfig parse_analyze_config(const Json& j);
EquivalenceConfig parse_equivalence_config(const Json& j);
Example1Config parse_example1_config(const Json& j);

// Each command returns the JSON report it wrote. Reports also land in
// <out_dir> as report JSON plus, for simulate, a Table-style CSV.
Json run_simulate(const SimulateConfig& config);
Json run_analyze(const AnalyzeConfig& config);
Json run_equivalence(const EquivalenceConfig& config);
Json run_example1(const Example1Config& config);

// Structural check of a report against the published schema
// (docs/run_report.schema.json); throws ValidationError on violation.
void validate_report(const Json& report);

// FNV-1a hash of the canonical (sorted-key) config serialization.
std::string config_hash(const Json& config);

}  // namespace mcausal
