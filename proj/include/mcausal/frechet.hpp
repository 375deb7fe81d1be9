#pragma once

#include <optional>
#include <vector>

#include "mcausal/geometry.hpp"
#include "mcausal/rng.hpp"

namespace mcausal {

// Points with nonnegative weights summing to 1.
struct WeightedSample {
    std::vector<ManifoldPoint> points;
    Vec weights;
};

void validate_sample(const WeightedSample& sample);

struct SolverOptions {
    int max_iterations = 1000;
    double step_size = 1.0;           // initial step, halved on objective increase
    double gradient_tolerance = 1e-9;
    double median_smoothing = 1e-9;   // epsilon in sqrt(d^2 + eps^2), gradient only
};

void validate_options(const SolverOptions& opts);

struct SolverResult {
    ManifoldPoint minimizer;
    double objective_value = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_gradient_norm = 0.0;
};

// sum_i w_i d(p, y_i)^alpha; alpha = 2 for the Frechet functional, 1 for the
// geometric-median functional.
double weighted_objective(const WeightedSample& sample, const ManifoldPoint& p, int alpha);

// Riemannian gradient of the functional above: -2 sum w_i log_p(y_i) for
// alpha = 2 and -sum w_i log_p(y_i)/d_i for alpha = 1, where d_i is smoothed
// as sqrt(d^2 + median_smoothing^2).
TangentVector weighted_objective_gradient(const WeightedSample& sample, const ManifoldPoint& p,
                                          int alpha, double median_smoothing);

// Gradient descent with halving backtracking. Starts from `init` if given,
// otherwise from the sample point with the smallest objective value.
SolverResult weighted_l_alpha_estimator(const WeightedSample& sample, int alpha,
                                        const SolverOptions& opts = {},
                                        const std::optional<ManifoldPoint>& init = std::nullopt);

enum class Group { Treated, Control };

// Per-unit weights for the stratified estimator: within stratum s the
// requested group's units share weight lambda_hat[s] equally; all other units
// get weight 0. Throws EstimationError naming any stratum with an empty cell.
Vec stratification_weights(const std::vector<int>& z, const std::vector<int>& strata,
                           const Vec& lambda_hat, Group group);

// Re-solves from a handful of random sample-point initializations and reports
// whether equally good objectives were reached at visibly different points
// (a sign that the minimizer set is not a singleton).
struct UniquenessReport {
    bool ambiguous = false;
    double objective_spread = 0.0;
    double max_minimizer_distance = 0.0;
};

UniquenessReport assess_uniqueness(const WeightedSample& sample, int alpha,
                                   const SolverOptions& opts, Rng& rng, int restarts = 5);

}  // namespace mcausal
