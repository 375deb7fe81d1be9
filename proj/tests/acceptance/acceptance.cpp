// Acceptance suite: one pass/fail line per criterion. Run with no arguments
// for the full battery or with "--criterion k" for a single one. Criterion 10
// needs the real landmark data; point METRIC_CAUSAL_DATA_DIR at a directory
// holding units.csv and outcomes.csv, otherwise it reports SKIP.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "mcausal/harness.hpp"
#include "mcausal/inference.hpp"
#include "mcausal/parallel.hpp"
#include "mcausal/regression.hpp"
#include "mcausal/sampling.hpp"
#include "../support.hpp"

using namespace mcausal;
using namespace mcausal::testing;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240808;

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string out_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "mcausal_acceptance" / leaf;
    return dir.string();
}

// --- criterion 1: geometry invariants ---------------------------------------

Outcome criterion_geometry() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(kSeed);
    int checked = 0;
    for (const auto& kind : all_kinds()) {
        const double bound = 0.99 * injectivity_bound(kind);
        for (int rep = 0; rep < 1000; ++rep) {
            ++checked;
            const ManifoldPoint p = random_point(kind, rng);
            const TangentVector v = random_tangent(p, rng.uniform(1e-4, bound), rng);
            const ManifoldPoint q = exp_map(p, v);
            const TangentVector back = log_map(p, q);
            if ((back.components - v.components).norm() >= 1e-8)
                return {false, false, "round trip failed on " + kind.name()};
            if (std::abs(norm(back) - distance(p, q)) >= 1e-9)
                return {false, false, "log norm vs distance failed on " + kind.name()};
            if (distance(exp_map(p, back), q) >= 1e-8)
                return {false, false, "exp(log) reconstruction failed on " + kind.name()};

            const ManifoldPoint a = random_point(kind, rng);
            const ManifoldPoint b = random_point(kind, rng);
            const ManifoldPoint c = random_point(kind, rng);
            if (distance(a, b) != distance(b, a))
                return {false, false, "symmetry failed on " + kind.name()};
            if (distance(a, c) > distance(a, b) + distance(b, c) + 1e-9)
                return {false, false, "triangle inequality failed on " + kind.name()};

            ManifoldPoint target = random_point(kind, rng);
            if (kind.tag() == ManifoldTag::Sphere2) {
                while (distance(p, target) > 0.99 * kPi) target = random_point(kind, rng);
            } else if (kind.tag() == ManifoldTag::KendallShape) {
                while (distance(p, target) > 0.49 * kPi) target = random_point(kind, rng);
            }
            const TangentVector w = random_tangent(p, rng.uniform(0.1, 2.0), rng);
            const TangentVector moved = parallel_transport(p, target, w);
            if (std::abs(norm(moved) - norm(w)) >= 1e-9)
                return {false, false, "transport isometry failed on " + kind.name()};

            const double t1 = rng.uniform01(), t2 = rng.uniform01();
            const ManifoldPoint g1 = exp_map(p, TangentVector{p, t1 * v.components});
            const ManifoldPoint g2 = exp_map(p, TangentVector{p, t2 * v.components});
            if (std::abs(distance(g1, g2) - std::abs(t1 - t2) * norm(v)) >= 1e-8)
                return {false, false, "geodesic speed failed on " + kind.name()};
        }
    }
    const double seconds = elapsed_seconds(start);
    if (seconds >= 10.0)
        return {false, false, "runtime " + std::to_string(seconds) + " s exceeds 10 s"};
    return {true, false,
            std::to_string(checked) + " random cases per property across 4 manifolds in " +
                std::to_string(seconds) + " s"};
}

// --- criterion 2: gradient checks -------------------------------------------

Outcome criterion_gradients() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(kSeed + 1);
    int configs = 0;
    double worst = 0.0;
    for (const auto& kind : all_kinds()) {
        for (int rep = 0; rep < 30; ++rep) {
            for (int alpha : {1, 2}) {
                ++configs;
                const ManifoldPoint anchor = random_point(kind, rng);
                WeightedSample sample;
                Vec weights(6);
                std::vector<double> xs;
                for (int i = 0; i < 6; ++i) {
                    sample.points.push_back(
                        exp_map(anchor, random_tangent(anchor, 0.6 * rng.uniform01(), rng)));
                    weights[i] = rng.uniform(0.1, 1.0);
                    xs.push_back(rng.uniform(-1.0, 1.0));
                }
                sample.weights = weights / weights.sum();
                const ManifoldPoint p =
                    exp_map(anchor, random_tangent(anchor, 0.25, rng));
                const double h = 1e-5;

                {  // center objective
                    const TangentVector grad =
                        weighted_objective_gradient(sample, p, alpha, 1e-9);
                    const TangentVector dir = random_tangent(p, 1.0, rng);
                    const auto at = [&](double s) {
                        return weighted_objective(
                            sample, exp_map(p, TangentVector{p, s * dir.components}), alpha);
                    };
                    const double fd = (at(h) - at(-h)) / (2.0 * h);
                    const double an = inner(grad, dir);
                    const double rel =
                        std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
                    worst = std::max(worst, rel);
                    if (rel >= 1e-5)
                        return {false, false,
                                "center gradient mismatch " + std::to_string(rel) + " on " +
                                    kind.name()};
                }
                {  // regression objective, both parameter blocks
                    const TangentVector v = random_tangent(p, rng.uniform(0.1, 0.6), rng);
                    const RegressionGradient grad = geodesic_regression_gradient(
                        xs, sample.points, sample.weights, p, v, alpha, 1e-9);
                    const TangentVector dir = random_tangent(p, 1.0, rng);
                    const auto at_v = [&](double s) {
                        const TangentVector vs{p, v.components + s * dir.components};
                        return geodesic_regression_objective(xs, sample.points,
                                                             sample.weights, p, vs, alpha);
                    };
                    const double fd_v = (at_v(h) - at_v(-h)) / (2.0 * h);
                    const double an_v = inner(grad.velocity, dir);
                    const double rel_v = std::abs(fd_v - an_v) /
                                         std::max({std::abs(fd_v), std::abs(an_v), 1e-6});
                    const auto at_p = [&](double s) {
                        const ManifoldPoint ps =
                            exp_map(p, TangentVector{p, s * dir.components});
                        const TangentVector vs = parallel_transport(p, ps, v);
                        return geodesic_regression_objective(xs, sample.points,
                                                             sample.weights, ps, vs, alpha);
                    };
                    const double fd_p = (at_p(h) - at_p(-h)) / (2.0 * h);
                    const double an_p = inner(grad.base, dir);
                    const double rel_p = std::abs(fd_p - an_p) /
                                         std::max({std::abs(fd_p), std::abs(an_p), 1e-6});
                    worst = std::max({worst, rel_v, rel_p});
                    if (rel_v >= 1e-5 || rel_p >= 1e-5)
                        return {false, false,
                                "regression gradient mismatch on " + kind.name()};
                }
            }
        }
    }
    const double seconds = elapsed_seconds(start);
    if (seconds >= 30.0)
        return {false, false, "runtime " + std::to_string(seconds) + " s exceeds 30 s"};
    return {true, false,
            std::to_string(configs) + " configurations, worst relative error " +
                std::to_string(worst) + ", " + std::to_string(seconds) + " s"};
}

// --- criterion 3: solver vs grid oracle -------------------------------------

Outcome criterion_oracle() {
    Rng rng(kSeed + 2);
    const auto s2 = ManifoldKind::sphere2();
    const int problems = 25;
    std::vector<WeightedSample> samples;
    for (int k = 0; k < problems; ++k) {
        const ManifoldPoint center = random_point(s2, rng);
        WeightedSample sample;
        for (int i = 0; i < 5; ++i)
            sample.points.push_back(
                exp_map(center, random_tangent(center, 0.6 * rng.uniform01(), rng)));
        sample.weights = Vec::Constant(5, 0.2);
        samples.push_back(std::move(sample));
    }
    std::vector<double> gap(problems, 0.0);
    parallel_for(problems, default_thread_count(), [&](int k) {
        const SolverResult solved =
            weighted_l_alpha_estimator(samples[static_cast<std::size_t>(k)], 2);
        const ManifoldPoint reference =
            sphere_grid_oracle(samples[static_cast<std::size_t>(k)], 2);
        gap[static_cast<std::size_t>(k)] =
            distance(solved.minimizer, reference);
    });
    double worst = 0.0;
    for (double g : gap) worst = std::max(worst, g);
    if (worst >= 5e-3)
        return {false, false, "solver and grid oracle disagree by " + std::to_string(worst)};

    // Euclidean closed form to 1e-9.
    for (int rep = 0; rep < 20; ++rep) {
        const auto e3 = ManifoldKind::euclidean(3);
        WeightedSample cloud;
        Vec w(7);
        for (int i = 0; i < 7; ++i) {
            cloud.points.push_back(random_point(e3, rng));
            w[i] = rng.uniform(0.1, 1.0);
        }
        cloud.weights = w / w.sum();
        Vec mean = Vec::Zero(3);
        for (int i = 0; i < 7; ++i) mean += cloud.weights[i] * cloud.points[i].coords;
        const SolverResult result = weighted_l_alpha_estimator(cloud, 2);
        if ((result.minimizer.coords - mean).norm() >= 1e-9)
            return {false, false, "euclidean closed form missed at 1e-9"};
    }
    return {true, false,
            "25 sphere problems within 5e-3 of the grid oracle (worst " +
                std::to_string(worst) + "); euclidean closed forms at 1e-9"};
}

// --- criterion 4: regression equivalence ------------------------------------

Outcome criterion_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    double max_gap = 0.0, max_spread = 0.0;
    for (const std::string manifold : {"sphere2", "hyperbolic2", "euclidean3"}) {
        Json config{{"manifold", manifold}, {"n", 40},       {"datasets", 50},
                    {"alpha", "both"},      {"tolerance", 1e-4},
                    {"seed", kSeed + 3},    {"out", out_dir("theorem1_" + manifold)}};
        const Json report = run_equivalence(parse_equivalence_config(config));
        max_gap = std::max(max_gap, report.at("max_gap").get<double>());
        max_spread = std::max(max_spread, report.at("max_beta_spread").get<double>());
        if (!report.at("pass").get<bool>())
            return {false, false,
                    manifold + ": gap " + std::to_string(report.at("max_gap").get<double>()) +
                        ", beta spread " +
                        std::to_string(report.at("max_beta_spread").get<double>())};
    }
    const double seconds = elapsed_seconds(start);
    if (seconds >= 300.0)
        return {false, false, "runtime " + std::to_string(seconds) + " s exceeds 5 min"};
    return {true, false,
            "50 datasets x 3 manifolds x both estimators: max gap " +
                std::to_string(max_gap) + ", max beta spread " + std::to_string(max_spread) +
                ", " + std::to_string(seconds) + " s"};
}

// --- criteria 5-7: simulation tables ----------------------------------------

double cell_mae(const Json& report, const std::string& estimator, int n) {
    for (const auto& cell : report.at("results")) {
        if (cell.at("estimator") == estimator && cell.at("n") == n)
            return cell.at("mae").get<double>();
    }
    throw std::runtime_error("cell not found");
}

double cell_coverage(const Json& report, const std::string& estimator, int n) {
    for (const auto& cell : report.at("results")) {
        if (cell.at("estimator") == estimator && cell.at("n") == n)
            return cell.at("coverage").get<double>();
    }
    throw std::runtime_error("cell not found");
}

Outcome criterion_table1_mae() {
    const auto start = std::chrono::steady_clock::now();
    Json config{{"scenario", 1},
                {"n", Json::array({32, 128, 1024})},
                {"replicates", 100},
                {"seed", kSeed + 5},
                {"out", out_dir("table1")}};
    const Json report = run_simulate(parse_simulate_config(config));

    const std::vector<int> sizes{32, 128, 1024};
    const std::vector<double> t2_ref{0.122, 0.060, 0.021};
    const std::vector<double> t1_ref{0.148, 0.067, 0.025};
    std::string detail;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const double mae2 = cell_mae(report, "T2", sizes[i]);
        const double mae1 = cell_mae(report, "T1", sizes[i]);
        detail += "n=" + std::to_string(sizes[i]) + " T2=" + std::to_string(mae2) +
                  " T1=" + std::to_string(mae1) + " ";
        if (std::abs(mae2 - t2_ref[i]) > 0.03)
            return {false, false,
                    "T2 mae at n=" + std::to_string(sizes[i]) + " is " +
                        std::to_string(mae2) + ", expected " + std::to_string(t2_ref[i]) +
                        " within 0.03"};
        if (std::abs(mae1 - t1_ref[i]) > 0.035)
            return {false, false,
                    "T1 mae at n=" + std::to_string(sizes[i]) + " is " +
                        std::to_string(mae1) + ", expected " + std::to_string(t1_ref[i]) +
                        " within 0.035"};
    }
    for (const std::string estimator : {"T2", "T1"}) {
        if (!(cell_mae(report, estimator, 32) > cell_mae(report, estimator, 128) &&
              cell_mae(report, estimator, 128) > cell_mae(report, estimator, 1024)))
            return {false, false, estimator + " mae is not strictly decreasing in n"};
    }
    detail += "(" + std::to_string(elapsed_seconds(start)) + " s)";
    return {true, false, detail};
}

Outcome criterion_coverage() {
    const auto start = std::chrono::steady_clock::now();
    // Reduced smoke cell first; it carries its own hard time limit.
    Json smoke{{"scenario", 2}, {"n", 64},          {"replicates", 50},
               {"bootstrap", 200}, {"seed", kSeed + 6}, {"out", out_dir("coverage_smoke")}};
    const Json smoke_report = run_simulate(parse_simulate_config(smoke));
    const double smoke_elapsed = elapsed_seconds(start);
    for (const std::string estimator : {"T2", "T1"}) {
        const double coverage = cell_coverage(smoke_report, estimator, 64);
        if (coverage < 0.80 || coverage > 1.00)
            return {false, false,
                    "smoke coverage " + estimator + " = " + std::to_string(coverage) +
                        " outside [0.80, 1.00]"};
    }
    if (smoke_elapsed >= 600.0)
        return {false, false,
                "smoke cell took " + std::to_string(smoke_elapsed) + " s (limit 600 s)"};

    Json full{{"scenario", 2}, {"n", 256},         {"replicates", 100},
              {"bootstrap", 500}, {"seed", kSeed + 7}, {"out", out_dir("coverage_full")}};
    const Json report = run_simulate(parse_simulate_config(full));
    std::string detail = "smoke " + std::to_string(smoke_elapsed) + " s; ";
    for (const std::string estimator : {"T2", "T1"}) {
        const double coverage = cell_coverage(report, estimator, 256);
        detail += estimator + " coverage " + std::to_string(coverage) + " ";
        if (coverage < 0.87 || coverage > 0.99)
            return {false, false,
                    estimator + " coverage " + std::to_string(coverage) +
                        " outside [0.87, 0.99]"};
    }
    detail += "(total " + std::to_string(elapsed_seconds(start)) + " s)";
    return {true, false, detail};
}

Outcome criterion_spot_checks() {
    Json low_noise{{"scenario", 1},    {"n", 128},          {"replicates", 100},
                   {"sigma2", std::pow(kPi / 16.0, 2)},     {"alpha", "2"},
                   {"seed", kSeed + 8}, {"out", out_dir("spot1")}};
    const Json first = run_simulate(parse_simulate_config(low_noise));
    const double mae_low = cell_mae(first, "T2", 128);
    if (std::abs(mae_low - 0.032) > 0.02)
        return {false, false,
                "type 1 sigma2=(pi/16)^2 n=128 T2 mae = " + std::to_string(mae_low) +
                    ", expected 0.032 within 0.02"};

    Json matched{{"scenario", 3},    {"n", 256},          {"replicates", 100},
                 {"sigma2", std::pow(kPi / 4.0, 2)},       {"alpha", "2"},
                 {"seed", kSeed + 9}, {"out", out_dir("spot3")}};
    const Json second = run_simulate(parse_simulate_config(matched));
    const double mae_matched = cell_mae(second, "T2", 256);
    if (std::abs(mae_matched - 0.079) > 0.03)
        return {false, false,
                "type 3 sigma2=(pi/4)^2 n=256 T2 mae = " + std::to_string(mae_matched) +
                    ", expected 0.079 within 0.03"};
    return {true, false,
            "type 1 low-noise mae " + std::to_string(mae_low) + "; type 3 matched mae " +
                std::to_string(mae_matched)};
}

// --- criterion 8: the nested-estimator counterexample ------------------------

Outcome criterion_example1() {
    Json config{{"c", kPi / 4.0},     {"n", 3000},
                {"replicates", 20},   {"seed", kSeed + 10},
                {"out", out_dir("example1")}};
    const Json report = run_example1(parse_example1_config(config));
    const auto& results = report.at("results");
    const double mean_t2 = results.at("mean_t2").get<double>();
    const double mean_nested = results.at("mean_nested").get<double>();
    const double limit = results.at("nested_limit").get<double>();
    if (mean_t2 > 0.05)
        return {false, false, "mean T2 = " + std::to_string(mean_t2) + " exceeds 0.05"};
    if (limit <= 0.0) return {false, false, "derived limit is not positive"};
    if (std::abs(mean_nested - limit) > 0.05)
        return {false, false,
                "nested mean " + std::to_string(mean_nested) + " vs limit " +
                    std::to_string(limit) + " differs by more than 0.05"};
    return {true, false,
            "mean T2 " + std::to_string(mean_t2) + "; nested " + std::to_string(mean_nested) +
                " vs derived limit " + std::to_string(limit)};
}

// --- criterion 9: randomization-test validity --------------------------------

Outcome criterion_randomization() {
    const int n_datasets = 200;
    const int n_perm = 199;
    std::vector<double> pvalues(n_datasets, 0.0);
    parallel_for(n_datasets, default_thread_count(), [&](int d) {
        Rng rng(kSeed + 11 + static_cast<std::uint64_t>(d));
        // Sharp null: both potential outcomes coincide.
        const auto s2 = ManifoldKind::sphere2();
        Vec base(3);
        base << 1.0, 0.0, 0.0;
        const ManifoldPoint center{s2, base};
        StratifiedDataset data;
        data.n_strata = 2;
        data.lambda_hat = Vec::Constant(2, 0.5);
        const int n = 36;
        for (int i = 0; i < n; ++i) {
            Unit unit;
            unit.id = "u" + std::to_string(i);
            unit.covariates = Vec(1);
            unit.covariates << rng.uniform(-0.5, 0.5);
            unit.stratum = unit.covariates[0] >= 0.0 ? 1 : 2;
            unit.outcome = sample_riemannian_normal(s2, center, 0.15, rng);
            data.units.push_back(std::move(unit));
        }
        for (int s = 1; s <= 2; ++s) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (data.units[static_cast<std::size_t>(i)].stratum == s)
                    members.push_back(i);
            rng.shuffle(members);
            const std::size_t n_treated = (members.size() + 1) / 2;
            for (std::size_t k = 0; k < members.size(); ++k)
                data.units[static_cast<std::size_t>(members[k])].z = k < n_treated ? 1 : 0;
        }
        Rng perm(kSeed + 500 + static_cast<std::uint64_t>(d));
        pvalues[static_cast<std::size_t>(d)] =
            randomization_test(data, 2, n_perm, SolverOptions{}, perm).p_value;
    });
    std::sort(pvalues.begin(), pvalues.end());
    double ks = 0.0;
    for (int i = 0; i < n_datasets; ++i) {
        const double hi = static_cast<double>(i + 1) / n_datasets;
        const double lo = static_cast<double>(i) / n_datasets;
        ks = std::max({ks, std::abs(hi - pvalues[static_cast<std::size_t>(i)]),
                       std::abs(pvalues[static_cast<std::size_t>(i)] - lo)});
    }
    const double critical = 1.63 / std::sqrt(static_cast<double>(n_datasets));
    if (ks >= critical)
        return {false, false,
                "KS statistic " + std::to_string(ks) + " exceeds the 0.01 critical value " +
                    std::to_string(critical)};
    return {true, false,
            "KS statistic " + std::to_string(ks) + " under sharp-null p-values (critical " +
                std::to_string(critical) + ")"};
}

// --- criterion 10: real landmark data ----------------------------------------

Outcome criterion_real_data() {
    const char* dir = std::getenv("METRIC_CAUSAL_DATA_DIR");
    if (dir == nullptr)
        return {true, true, "METRIC_CAUSAL_DATA_DIR not set; real-data check unavailable"};
    const std::filesystem::path base(dir);
    const auto units = base / "units.csv";
    const auto outcomes = base / "outcomes.csv";
    if (!std::filesystem::exists(units) || !std::filesystem::exists(outcomes))
        return {true, true, "units.csv/outcomes.csv not found under " + std::string(dir)};

    Json config{{"units", units.string()},
                {"outcomes", outcomes.string()},
                {"bootstrap", 1000},
                {"permutations", 999},
                {"seed", kSeed + 12},
                {"euclidean_baseline", true},
                {"out", out_dir("real_data")}};
    const Json report = run_analyze(parse_analyze_config(config));

    const auto value_of = [&](const Json& cells, const std::string& estimator,
                              const char* field) {
        for (const auto& cell : cells)
            if (cell.at("estimator") == estimator) return cell.at(field).get<double>();
        throw std::runtime_error("estimator row missing");
    };
    const double t2 = value_of(report.at("results"), "T2", "estimate");
    const double t1 = value_of(report.at("results"), "T1", "estimate");
    const double p2 = value_of(report.at("results"), "T2", "p_value");
    const double p1 = value_of(report.at("results"), "T1", "p_value");
    const double base2 = value_of(report.at("euclidean_baseline"), "T2", "estimate");
    std::string detail = "T2=" + std::to_string(t2) + " T1=" + std::to_string(t1) +
                         " p2=" + std::to_string(p2) + " p1=" + std::to_string(p1) +
                         " baselineT2=" + std::to_string(base2);
    if (std::abs(t2 - 0.01819) > 0.004) return {false, false, detail + " (T2 off)"};
    if (std::abs(t1 - 0.01775) > 0.004) return {false, false, detail + " (T1 off)"};
    if (p2 > 0.01 || p1 > 0.01) return {false, false, detail + " (p-values too large)"};
    if (std::abs(base2 - 0.02241) > 0.004)
        return {false, false, detail + " (euclidean baseline off)"};
    return {true, false, detail};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[i + 1]);
    }
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, criterion_geometry},     {2, criterion_gradients},
        {3, criterion_oracle},       {4, criterion_equivalence},
        {5, criterion_table1_mae},   {6, criterion_coverage},
        {7, criterion_spot_checks},  {8, criterion_example1},
        {9, criterion_randomization},{10, criterion_real_data},
    };
    bool all_pass = true;
    for (const auto& [index, fn] : criteria) {
        if (only != 0 && index != only) continue;
        Outcome outcome;
        try {
            outcome = fn();
        } catch (const std::exception& e) {
            outcome = {false, false, std::string("exception: ") + e.what()};
        }
        const char* label = outcome.skipped ? "SKIP" : (outcome.pass ? "PASS" : "FAIL");
        std::cout << label << " criterion " << index << ": " << outcome.detail << std::endl;
        if (!outcome.pass && !outcome.skipped) all_pass = false;
    }
    return all_pass ? 0 : 1;
}
