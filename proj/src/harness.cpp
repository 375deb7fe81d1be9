#include "mcausal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "mcausal/csv.hpp"
#include "mcausal/inference.hpp"
#include "mcausal/matching.hpp"
#include "mcausal/parallel.hpp"
#include "mcausal/regression.hpp"
#include "mcausal/sampling.hpp"

namespace mcausal {

namespace {

namespace fs = std::filesystem;

std::vector<int> parse_alphas(const Json& j, const char* key) {
    if (!j.contains(key)) return {2, 1};
    const auto& value = j.at(key);
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "both") return {2, 1};
        if (s == "1") return {1};
        if (s == "2") return {2};
        throw ValidationError("alpha must be 1, 2, or 'both'");
    }
    if (value.is_number_integer()) {
        const int a = value.get<int>();
        if (a != 1 && a != 2) throw ValidationError("alpha must be 1 or 2");
        return {a};
    }
    throw ValidationError("alpha must be 1, 2, or 'both'");
}

std::uint64_t parse_seed(const Json& j, bool* present) {
    if (j.contains("seed")) {
        if (present) *present = true;
        return j.at("seed").get<std::uint64_t>();
    }
    if (present) *present = false;
    return 0;
}

void write_text(const std::string& path, const std::string& text) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestError("cannot write " + path);
    out << text;
}

std::string format_double(double value) {
    std::ostringstream s;
    s.precision(10);
    s << value;
    return s.str();
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
}

double mean_of(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Json base_report(const char* command, const Json& config, std::uint64_t seed) {
    Json report;
    report["command"] = command;
    report["artifact_version"] = kArtifactVersion;
    report["config"] = config;
    report["config_hash"] = config_hash(config);
    report["seed"] = seed;
    return report;
}

}  // namespace

std::string config_hash(const Json& config) {
    const std::string canonical = config.dump();
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001B3ull;
    }
    std::ostringstream s;
    s << std::hex << hash;
    return s.str();
}

SimulateConfig parse_simulate_config(const Json& j) {
    SimulateConfig config;
    if (!j.contains("scenario")) throw ValidationError("simulate config needs 'scenario'");
    config.scenario = j.at("scenario").get<int>();
    if (config.scenario < 1 || config.scenario > 4)
        throw ValidationError("scenario must be 1..4");
    if (!j.contains("n")) throw ValidationError("simulate config needs 'n' (list of sizes)");
    if (j.at("n").is_array())
        config.n_values = j.at("n").get<std::vector<int>>();
    else
        config.n_values = {j.at("n").get<int>()};
    if (config.n_values.empty()) throw ValidationError("'n' must not be empty");
    for (int n : config.n_values)
        if (n < 2) throw ValidationError("sample sizes must be at least 2");
    config.replicates = j.value("replicates", 100);
    if (config.replicates < 1) throw ValidationError("replicates must be positive");
    config.sigma2 = j.value("sigma2", 0.0);
    config.alphas = parse_alphas(j, "alpha");
    config.bootstrap_b = j.value("bootstrap", 500);
    config.permutations = j.value("permutations", 0);
    config.level = j.value("level", 0.95);
    config.seed = parse_seed(j, &config.seed_set);
    config.lambda_policy = j.value("lambda", std::string("default"));
    if (config.lambda_policy != "default" && config.lambda_policy != "known" &&
        config.lambda_policy != "empirical")
        throw ValidationError("lambda policy must be default, known, or empirical");
    if (config.scenario >= 3 && config.lambda_policy == "known")
        throw ValidationError("matched scenarios have no known stratum weights");
    config.caliper = j.value("caliper", 0.2);
    config.out_dir = j.value("out", std::string("."));
    config.threads = j.value("threads", 0);
    return config;
}

AnalyzeConfig parse_analyze_config(const Json& j) {
    AnalyzeConfig config;
    if (!j.contains("units") || !j.contains("outcomes"))
        throw ValidationError("analyze config needs 'units' and 'outcomes' CSV paths");
    config.units_csv = j.at("units").get<std::string>();
    config.outcomes_csv = j.at("outcomes").get<std::string>();
    for (const auto& path : {config.units_csv, config.outcomes_csv}) {
        if (!fs::exists(path)) throw ValidationError("input file does not exist: " + path);
    }
    config.alphas = parse_alphas(j, "alpha");
    config.caliper = j.value("caliper", 0.2);
    config.bootstrap_b = j.value("bootstrap", 500);
    config.permutations = j.value("permutations", 999);
    config.level = j.value("level", 0.95);
    bool seed_present = false;
    const std::uint64_t seed = parse_seed(j, &seed_present);
    if (seed_present) config.seed = seed;
    config.euclidean_baseline = j.value("euclidean_baseline", false);
    config.out_dir = j.value("out", std::string("."));
    config.threads = j.value("threads", 0);
    return config;
}

EquivalenceConfig parse_equivalence_config(const Json& j) {
    EquivalenceConfig config;
    config.manifold = j.value("manifold", std::string("sphere2"));
    if (config.manifold != "sphere2" && config.manifold != "hyperbolic2" &&
        config.manifold != "euclidean3")
        throw ValidationError("manifold must be sphere2, hyperbolic2, or euclidean3");
    config.n_units = j.value("n", 40);
    if (config.n_units < 8) throw ValidationError("n must be at least 8");
    config.datasets = j.value("datasets", 5);
    if (config.datasets < 1) throw ValidationError("datasets must be positive");
    config.alphas = parse_alphas(j, "alpha");
    if (j.contains("betas")) config.betas = j.at("betas").get<std::vector<double>>();
    if (config.betas.empty()) throw ValidationError("betas must not be empty");
    for (double beta : config.betas)
        if (beta <= 0.0 || beta >= 1.0) throw ValidationError("betas must lie in (0,1)");
    config.tolerance = j.value("tolerance", 1e-4);
    bool seed_present = false;
    const std::uint64_t seed = parse_seed(j, &seed_present);
    if (seed_present) config.seed = seed;
    config.out_dir = j.value("out", std::string("."));
    return config;
}

Example1Config parse_example1_config(const Json& j) {
    Example1Config config;
    config.c = j.value("c", std::numbers::pi / 4.0);
    if (config.c <= 0.0 || config.c >= std::numbers::pi / 2.0)
        throw ValidationError("c must lie in (0, pi/2)");
    config.n_units = j.value("n", 3000);
    if (config.n_units < 4) throw ValidationError("n must be at least 4");
    config.replicates = j.value("replicates", 5);
    if (config.replicates < 1) throw ValidationError("replicates must be positive");
    bool seed_present = false;
    const std::uint64_t seed = parse_seed(j, &seed_present);
    if (seed_present) config.seed = seed;
    config.out_dir = j.value("out", std::string("."));
    config.threads = j.value("threads", 0);
    return config;
}

Json run_simulate(const SimulateConfig& config) {
    if (!config.seed_set) throw ValidationError("simulate requires a seed");
    const bool interval_scenario = config.scenario == 2 || config.scenario == 4;
    const int n_threads = config.threads > 0 ? config.threads : default_thread_count();

    Json config_echo;
    config_echo["scenario"] = config.scenario;
    config_echo["n"] = config.n_values;
    config_echo["replicates"] = config.replicates;
    config_echo["sigma2"] = config.sigma2;
    config_echo["alpha"] = config.alphas;
    config_echo["bootstrap"] = config.bootstrap_b;
    config_echo["permutations"] = config.permutations;
    config_echo["level"] = config.level;
    config_echo["lambda"] = config.lambda_policy;
    config_echo["caliper"] = config.caliper;
    config_echo["seed"] = config.seed;
    Json report = base_report("simulate", config_echo, config.seed);

    struct ReplicateStats {
        std::vector<double> abs_error;  // one slot per alpha
        std::vector<double> value;
        std::vector<int> covered;  // -1 when no interval was computed
        std::vector<double> p_values;
        int discarded = 0;
        int solver_failures = 0;
        int ci_redraws = 0;
    };

    const double true_effect = 2.0;
    Json cells = Json::array();
    std::string csv = "experiment_type,estimator,n,estimate,standard_error\n";

    const Rng master(config.seed);
    for (std::size_t cell_index = 0; cell_index < config.n_values.size(); ++cell_index) {
        const int n = config.n_values[cell_index];
        const Rng cell_rng = master.substream(cell_index);
        std::vector<ReplicateStats> stats(static_cast<std::size_t>(config.replicates));

        parallel_for(config.replicates, n_threads, [&](int r) {
            ReplicateStats& slot = stats[static_cast<std::size_t>(r)];
            const Rng replicate_rng = cell_rng.substream(static_cast<std::uint64_t>(r));

            // Build the replicate, resampling wholesale whenever a stratum
            // (or matched set) comes out without both groups.
            StratifiedDataset data;
            constexpr int kMaxAttempts = 200;
            for (int attempt = 0;; ++attempt) {
                if (attempt == kMaxAttempts)
                    throw DegenerateReplicateError("replicate keeps producing empty cells");
                Rng stream =
                    replicate_rng.substream(1000 + static_cast<std::uint64_t>(attempt));
                try {
                    const ScenarioConfig scenario =
                        make_scenario_config(config.scenario, n, config.sigma2, config.seed);
                    data = generate_scenario(scenario, stream);
                    if (config.scenario >= 3) data = match_units(data.units, config.caliper);
                    if (config.lambda_policy == "empirical")
                        data.lambda_hat = empirical_stratum_weights(data.units, data.n_strata);
                    validate_dataset(data);
                    break;
                } catch (const DegenerateReplicateError&) {
                    ++slot.discarded;
                } catch (const MatchingError&) {
                    ++slot.discarded;
                } catch (const EstimationError&) {
                    ++slot.discarded;
                }
            }

            for (std::size_t a = 0; a < config.alphas.size(); ++a) {
                const int alpha = config.alphas[a];
                const EffectEstimate estimate = estimate_t_alpha(data, alpha, SolverOptions{});
                if (!estimate.converged()) ++slot.solver_failures;
                slot.value.push_back(estimate.value);
                slot.abs_error.push_back(std::abs(estimate.value - true_effect));
                if (interval_scenario) {
                    Rng boot = replicate_rng.substream(2000 + a);
                    std::optional<RematchPipeline> rematch;
                    if (config.scenario == 4)
                        rematch = [caliper = config.caliper](std::vector<Unit> resampled) {
                            return match_units(resampled, caliper);
                        };
                    const IntervalEstimate interval =
                        bootstrap_pivotal_ci(data, alpha, config.bootstrap_b, config.level,
                                             SolverOptions{}, boot, rematch);
                    slot.ci_redraws += interval.redraws;
                    slot.solver_failures += interval.solver_failures;
                    slot.covered.push_back(
                        interval.lower <= true_effect && true_effect <= interval.upper ? 1
                                                                                       : 0);
                } else {
                    slot.covered.push_back(-1);
                }
                if (config.permutations > 0) {
                    Rng perm = replicate_rng.substream(3000 + a);
                    slot.p_values.push_back(randomization_test(data, alpha,
                                                               config.permutations,
                                                               SolverOptions{}, perm)
                                                .p_value);
                }
            }
        });

        for (std::size_t a = 0; a < config.alphas.size(); ++a) {
            const int alpha = config.alphas[a];
            std::vector<double> errors, values;
            std::vector<int> covered;
            int discarded = 0, failures = 0, redraws = 0;
            for (const auto& slot : stats) {
                errors.push_back(slot.abs_error[a]);
                values.push_back(slot.value[a]);
                if (slot.covered[a] >= 0) covered.push_back(slot.covered[a]);
                discarded += slot.discarded;
                failures += slot.solver_failures;
                redraws += slot.ci_redraws;
            }
            Json cell;
            cell["experiment_type"] = config.scenario;
            cell["estimator"] = "T" + std::to_string(alpha);
            cell["n"] = n;
            cell["replicates"] = config.replicates;
            cell["true_value"] = true_effect;
            cell["mae"] = mean_of(errors);
            cell["mae_sd"] = sample_sd(errors);
            cell["mean_estimate"] = mean_of(values);
            Json diagnostics;
            diagnostics["resampled_replicates"] = discarded;
            diagnostics["solver_failures"] = failures;
            diagnostics["bootstrap_redraws"] = redraws;
            cell["diagnostics"] = diagnostics;
            double estimate = mean_of(errors);
            double se = sample_sd(errors);
            if (interval_scenario) {
                const double coverage =
                    covered.empty() ? 0.0
                                    : std::accumulate(covered.begin(), covered.end(), 0.0) /
                                          static_cast<double>(covered.size());
                const double coverage_se = std::sqrt(std::max(
                    0.0, coverage * (1.0 - coverage) /
                             static_cast<double>(std::max<std::size_t>(1, covered.size()))));
                cell["coverage"] = coverage;
                cell["coverage_se"] = coverage_se;
                cell["bootstrap"] = config.bootstrap_b;
                cell["level"] = config.level;
                estimate = coverage;
                se = coverage_se;
            }
            if (config.permutations > 0) {
                std::vector<double> ps;
                for (const auto& slot : stats) ps.push_back(slot.p_values[a]);
                cell["mean_p_value"] = mean_of(ps);
            }
            cells.push_back(cell);
            csv += std::to_string(config.scenario) + ",T" + std::to_string(alpha) + "," +
                   std::to_string(n) + "," + format_double(estimate) + "," +
                   format_double(se) + "\n";
        }
    }

    report["results"] = cells;
    validate_report(report);
    write_text(config.out_dir + "/simulate_report.json", report.dump(2) + "\n");
    write_text(config.out_dir + "/table.csv", csv);
    return report;
}

namespace {

// Rotation-align every preshape to the overall Frechet mean and reinterpret
// the aligned coordinates as flat vectors.
std::vector<Unit> euclidean_baseline_units(const std::vector<Unit>& units) {
    WeightedSample sample;
    for (const auto& u : units) sample.points.push_back(u.outcome);
    sample.weights = Vec::Constant(static_cast<Eigen::Index>(units.size()),
                                   1.0 / static_cast<double>(units.size()));
    const SolverResult mean =
        weighted_l_alpha_estimator(sample, 2, SolverOptions{}, sample.points.front());
    const ManifoldKind flat = ManifoldKind::euclidean(mean.minimizer.kind.ambient_dim());
    std::vector<Unit> flat_units = units;
    for (auto& u : flat_units) {
        const std::complex<double> s =
            as_complex(mean.minimizer.coords).dot(as_complex(u.outcome.coords));
        const double rho = std::abs(s);
        const std::complex<double> rot =
            rho > 0.0 ? std::conj(s) / rho : std::complex<double>(1.0, 0.0);
        u.outcome = ManifoldPoint{flat, from_complex(rot * as_complex(u.outcome.coords))};
    }
    return flat_units;
}

Json analyze_group(const std::vector<Unit>& units, const AnalyzeConfig& config,
                   std::uint64_t stream_offset, Json* matching_out) {
    MatchResult match;
    const StratifiedDataset matched = match_units(units, config.caliper, &match);
    const int n_threads = config.threads > 0 ? config.threads : default_thread_count();

    if (matching_out) {
        Json m;
        m["n_sets"] = match.n_sets;
        m["n_matched"] = matched.units.size();
        m["unmatched"] = Json::array();
        for (const auto& [index, reason] : match.unmatched) {
            Json u;
            u["unit"] = units[static_cast<std::size_t>(index)].id;
            u["reason"] = reason;
            m["unmatched"].push_back(u);
        }
        Json balance = Json::array();
        for (const auto& entry : match.balance) {
            Json b;
            b["before"] = entry.before;
            b["after"] = entry.after;
            balance.push_back(b);
        }
        m["balance"] = balance;
        *matching_out = m;
    }

    const Rng master(config.seed);
    const RematchPipeline rematch = [caliper = config.caliper](std::vector<Unit> resampled) {
        return match_units(resampled, caliper);
    };

    Json results = Json::array();
    for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        const int alpha = config.alphas[a];
        const EffectEstimate estimate = estimate_t_alpha(matched, alpha, SolverOptions{});
        Rng boot = master.substream(stream_offset + 10 + a);
        const IntervalEstimate interval =
            bootstrap_pivotal_ci(matched, alpha, config.bootstrap_b, config.level,
                                 SolverOptions{}, boot, rematch, n_threads);
        Rng perm = master.substream(stream_offset + 20 + a);
        const TestResult test = randomization_test(matched, alpha, config.permutations,
                                                   SolverOptions{}, perm, n_threads);
        Json cell;
        cell["estimator"] = "T" + std::to_string(alpha);
        cell["estimate"] = estimate.value;
        cell["converged"] = estimate.converged();
        cell["interval_lower"] = interval.lower;
        cell["interval_upper"] = interval.upper;
        cell["level"] = config.level;
        cell["bootstrap"] = config.bootstrap_b;
        cell["bootstrap_redraws"] = interval.redraws;
        cell["p_value"] = test.p_value;
        cell["permutations"] = test.permutations;
        results.push_back(cell);
    }
    return results;
}

}  // namespace

Json run_analyze(const AnalyzeConfig& config) {
    const UnitTable unit_table = read_units_csv(config.units_csv);
    const LandmarkTable outcome_table = read_landmarks_csv(config.outcomes_csv);
    const std::vector<Unit> units = assemble_units(unit_table, outcome_table);

    Json config_echo;
    config_echo["units"] = config.units_csv;
    config_echo["outcomes"] = config.outcomes_csv;
    config_echo["alpha"] = config.alphas;
    config_echo["caliper"] = config.caliper;
    config_echo["bootstrap"] = config.bootstrap_b;
    config_echo["permutations"] = config.permutations;
    config_echo["level"] = config.level;
    config_echo["seed"] = config.seed;
    config_echo["euclidean_baseline"] = config.euclidean_baseline;
    Json report = base_report("analyze", config_echo, config.seed);

    Json matching;
    report["results"] = analyze_group(units, config, 0, &matching);
    report["matching"] = matching;
    report["n_units"] = units.size();
    report["landmarks"] = outcome_table.landmarks;

    if (config.euclidean_baseline) {
        const std::vector<Unit> flat = euclidean_baseline_units(units);
        report["euclidean_baseline"] = analyze_group(flat, config, 100, nullptr);
    }

    validate_report(report);
    write_text(config.out_dir + "/analyze_report.json", report.dump(2) + "\n");
    return report;
}

namespace {

double box_muller(Rng& rng) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Two-stratum dataset with a genuine effect, used by the equivalence check.
StratifiedDataset equivalence_dataset(const std::string& manifold, int n, Rng& rng) {
    constexpr int kMaxAttempts = 200;
    for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts)
            throw DegenerateReplicateError("equivalence dataset generation failed");
        Rng stream = rng.substream(static_cast<std::uint64_t>(attempt));
        try {
            if (manifold == "euclidean3") {
                const ManifoldKind kind = ManifoldKind::euclidean(3);
                StratifiedDataset data;
                data.n_strata = 2;
                data.lambda_hat = Vec::Constant(2, 0.5);
                for (int i = 0; i < n; ++i) {
                    Unit unit;
                    unit.id = "u" + std::to_string(i + 1);
                    unit.stratum = stream.uniform01() < 0.5 ? 1 : 2;
                    unit.z = static_cast<int>(stream.uniform_index(2));
                    Vec y(3);
                    y << box_muller(stream), box_muller(stream), box_muller(stream);
                    y *= 0.4;
                    if (unit.z == 1) y[0] += 1.0;
                    unit.outcome = ManifoldPoint{kind, std::move(y)};
                    data.units.push_back(std::move(unit));
                }
                validate_dataset(data);
                return data;
            }
            // Surface case: reuse the scenario generator; the observational
            // draw is restratified on the first covariate.
            const int scenario = manifold == "sphere2" ? 1 : 3;
            const ScenarioConfig cell = make_scenario_config(scenario, n, 0.0, 0);
            StratifiedDataset data = generate_scenario(cell, stream);
            if (scenario == 3) {
                for (auto& unit : data.units)
                    unit.stratum = unit.covariates[0] >= 0.0 ? 1 : 2;
                data.n_strata = 2;
                data.lambda_hat = Vec::Constant(2, 0.5);
            }
            validate_dataset(data);
            return data;
        } catch (const DegenerateReplicateError&) {
        } catch (const EstimationError&) {
        }
    }
}

}  // namespace

Json run_equivalence(const EquivalenceConfig& config) {
    Json config_echo;
    config_echo["manifold"] = config.manifold;
    config_echo["n"] = config.n_units;
    config_echo["datasets"] = config.datasets;
    config_echo["alpha"] = config.alphas;
    config_echo["betas"] = config.betas;
    config_echo["tolerance"] = config.tolerance;
    config_echo["seed"] = config.seed;
    Json report = base_report("theorem1", config_echo, config.seed);

    const Rng master(config.seed);
    Json results = Json::array();
    double max_gap = 0.0;
    double max_beta_spread = 0.0;
    for (int d = 0; d < config.datasets; ++d) {
        Rng dataset_rng = master.substream(static_cast<std::uint64_t>(d));
        const StratifiedDataset data =
            equivalence_dataset(config.manifold, config.n_units, dataset_rng);
        for (int alpha : config.alphas) {
            Json entry;
            entry["dataset"] = d;
            entry["alpha"] = alpha;
            Json gaps = Json::array();
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (double beta : config.betas) {
                const EquivalenceReport check = check_regression_equivalence(data, alpha, beta);
                Json g;
                g["beta_t"] = beta;
                g["norm_v"] = check.norm_v;
                g["t_alpha"] = check.t_alpha;
                g["gap"] = check.gap;
                g["multi_start"] = check.multi_start_used;
                gaps.push_back(g);
                max_gap = std::max(max_gap, check.gap);
                lo = std::min(lo, check.norm_v);
                hi = std::max(hi, check.norm_v);
            }
            entry["checks"] = gaps;
            entry["beta_spread"] = hi - lo;
            max_beta_spread = std::max(max_beta_spread, hi - lo);
            results.push_back(entry);
        }
    }
    report["results"] = results;
    report["max_gap"] = max_gap;
    report["max_beta_spread"] = max_beta_spread;
    report["pass"] = max_gap <= config.tolerance && max_beta_spread <= config.tolerance;
    validate_report(report);
    write_text(config.out_dir + "/theorem1_report.json", report.dump(2) + "\n");
    return report;
}

Json run_example1(const Example1Config& config) {
    Json config_echo;
    config_echo["c"] = config.c;
    config_echo["n"] = config.n_units;
    config_echo["replicates"] = config.replicates;
    config_echo["seed"] = config.seed;
    Json report = base_report("example1", config_echo, config.seed);

    const int n_threads = config.threads > 0 ? config.threads : default_thread_count();
    const Rng master(config.seed);
    std::vector<double> stratified(static_cast<std::size_t>(config.replicates));
    std::vector<double> nested(static_cast<std::size_t>(config.replicates));
    parallel_for(config.replicates, n_threads, [&](int r) {
        Rng rng = master.substream(static_cast<std::uint64_t>(r));
        for (int attempt = 0;; ++attempt) {
            Rng stream = rng.substream(static_cast<std::uint64_t>(attempt));
            try {
                const StratifiedDataset data =
                    example1_dataset(config.c, config.n_units, stream);
                stratified[static_cast<std::size_t>(r)] =
                    estimate_t_alpha(data, 2, SolverOptions{}).value;
                nested[static_cast<std::size_t>(r)] =
                    naive_nested_estimator(data, 2, SolverOptions{}).value;
                return;
            } catch (const DegenerateReplicateError&) {
                if (attempt > 100) throw;
            }
        }
    });

    const double limit = example1_nested_limit(config.c);
    Json results;
    results["mean_t2"] = mean_of(stratified);
    results["mean_nested"] = mean_of(nested);
    results["nested_limit"] = limit;
    results["midpoint_colatitude"] = example1_midpoint_colatitude(config.c);
    results["t2_near_zero"] = mean_of(stratified) <= 0.05;
    results["nested_near_limit"] = std::abs(mean_of(nested) - limit) <= 0.05;
    report["results"] = results;
    report["pass"] =
        results["t2_near_zero"].get<bool>() && results["nested_near_limit"].get<bool>();
    validate_report(report);
    write_text(config.out_dir + "/example1_report.json", report.dump(2) + "\n");
    return report;
}

void validate_report(const Json& report) {
    for (const char* key :
         {"command", "artifact_version", "config", "config_hash", "seed", "results"}) {
        if (!report.contains(key))
            throw ValidationError(std::string("report is missing required field '") + key +
                                  "'");
    }
    if (!report.at("command").is_string() || !report.at("config_hash").is_string())
        throw ValidationError("report command/config_hash must be strings");
    const std::string command = report.at("command").get<std::string>();
    if (command == "simulate" || command == "analyze") {
        if (!report.at("results").is_array())
            throw ValidationError("simulate/analyze results must be an array");
    }
    if (command == "theorem1" || command == "example1") {
        if (!report.contains("pass"))
            throw ValidationError(command + " report needs a 'pass' flag");
    }
    if (command == "analyze" && !report.contains("matching"))
        throw ValidationError("analyze report needs a 'matching' section");
}

}  // namespace mcausal
