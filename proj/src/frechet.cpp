#include "mcausal/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace mcausal {

namespace {

void require_alpha(int alpha) {
    if (alpha != 1 && alpha != 2)
        throw ValidationError("alpha must be 1 (median) or 2 (mean), got " +
                              std::to_string(alpha));
}

}  // namespace

void validate_sample(const WeightedSample& sample) {
    if (sample.points.empty()) throw ValidationError("weighted sample is empty");
    if (static_cast<Eigen::Index>(sample.points.size()) != sample.weights.size())
        throw ValidationError("weighted sample: point and weight counts differ");
    const ManifoldKind& kind = sample.points.front().kind;
    for (const auto& p : sample.points) {
        if (p.kind != kind)
            throw KindMismatchError("weighted sample mixes manifold kinds");
        validate_point(p);
    }
    if (sample.weights.minCoeff() < 0.0)
        throw ValidationError("weighted sample has a negative weight");
    if (std::abs(sample.weights.sum() - 1.0) > 1e-12)
        throw ValidationError("weighted sample weights do not sum to 1");
}

void validate_options(const SolverOptions& opts) {
    if (opts.max_iterations <= 0) throw ValidationError("max_iterations must be positive");
    if (opts.step_size <= 0.0) throw ValidationError("step_size must be positive");
    if (opts.gradient_tolerance <= 0.0)
        throw ValidationError("gradient_tolerance must be positive");
    if (opts.median_smoothing < 0.0)
        throw ValidationError("median_smoothing must be nonnegative");
}

double weighted_objective(const WeightedSample& sample, const ManifoldPoint& p, int alpha) {
    require_alpha(alpha);
    if (p.kind != sample.points.front().kind)
        throw KindMismatchError("weighted_objective: point kind differs from sample kind");
    double value = 0.0;
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const double w = sample.weights[static_cast<Eigen::Index>(i)];
        if (w == 0.0) continue;  // zero-weighted points contribute nothing
        const double d = distance(p, sample.points[i]);
        value += w * (alpha == 2 ? d * d : d);
    }
    return value;
}

TangentVector weighted_objective_gradient(const WeightedSample& sample, const ManifoldPoint& p,
                                          int alpha, double median_smoothing) {
    require_alpha(alpha);
    Vec grad = Vec::Zero(p.kind.ambient_dim());
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        const double w = sample.weights[static_cast<Eigen::Index>(i)];
        if (w == 0.0) continue;
        const TangentVector lg = log_map(p, sample.points[i]);
        if (alpha == 2) {
            grad -= 2.0 * w * lg.components;
        } else {
            const double d = norm(lg);
            const double smoothed = std::sqrt(d * d + median_smoothing * median_smoothing);
            if (smoothed > 0.0) grad -= (w / smoothed) * lg.components;
        }
    }
    return TangentVector{p, std::move(grad)};
}

SolverResult weighted_l_alpha_estimator(const WeightedSample& sample, int alpha,
                                        const SolverOptions& opts,
                                        const std::optional<ManifoldPoint>& init) {
    require_alpha(alpha);
    validate_sample(sample);
    validate_options(opts);

    ManifoldPoint current = [&] {
        if (init) {
            if (init->kind != sample.points.front().kind)
                throw KindMismatchError("weighted_l_alpha_estimator: init kind mismatch");
            validate_point(*init);
            return *init;
        }
        // Deterministic on-manifold start: the best sample point.
        std::size_t best = 0;
        double best_value = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sample.points.size(); ++i) {
            const double value = weighted_objective(sample, sample.points[i], alpha);
            if (value < best_value) {
                best_value = value;
                best = i;
            }
        }
        return sample.points[best];
    }();

    double current_value = weighted_objective(sample, current, alpha);
    const double min_step = opts.step_size * 1e-14;

    SolverResult result;
    result.minimizer = current;
    result.objective_value = current_value;

    // A geometric median can sit exactly on a data point, where the gradient
    // never vanishes (the objective has a kink). The optimality test there is
    // that the pull of the remaining points does not exceed the weight
    // sitting on the point; when it holds, the point itself is the answer and
    // descent would only crawl toward it forever.
    const auto try_kink_snap = [&](ManifoldPoint& current_point,
                                   double& value) -> bool {
        if (alpha != 1) return false;
        std::size_t nearest = 0;
        double nearest_distance = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sample.points.size(); ++i) {
            if (sample.weights[static_cast<Eigen::Index>(i)] == 0.0) continue;
            const double d = distance(current_point, sample.points[i]);
            if (d < nearest_distance) {
                nearest_distance = d;
                nearest = i;
            }
        }
        const ManifoldPoint& candidate = sample.points[nearest];
        double mass_at_point = 0.0;
        for (std::size_t i = 0; i < sample.points.size(); ++i) {
            const double w = sample.weights[static_cast<Eigen::Index>(i)];
            if (w > 0.0 && distance(candidate, sample.points[i]) < 1e-12)
                mass_at_point += w;
        }
        const double pull = norm(
            weighted_objective_gradient(sample, candidate, 1, opts.median_smoothing));
        if (pull > mass_at_point + 1e-12) return false;
        const double candidate_value = weighted_objective(sample, candidate, 1);
        if (candidate_value > value) return false;
        current_point = candidate;
        value = candidate_value;
        return true;
    };

    // Backtracking descent. While objective differences are measurable,
    // require sufficient decrease. Near the optimum those differences sink
    // below floating-point resolution long before the gradient reaches
    // tolerance, so a fallback pass accepts steps on gradient norm alone.
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const TangentVector grad =
            weighted_objective_gradient(sample, current, alpha, opts.median_smoothing);
        const double grad_norm = norm(grad);
        result.final_gradient_norm = grad_norm;
        if (grad_norm <= opts.gradient_tolerance) {
            result.converged = true;
            break;
        }
        // When the certifiable decrease sinks under the objective's rounding
        // floor, objective comparisons are pure noise; skip straight to the
        // gradient-norm pass.
        const bool measurable = 1e-4 * opts.step_size * grad_norm * grad_norm >
                                8.0 * std::numeric_limits<double>::epsilon() *
                                    std::max(current_value, 1e-30);
        bool accepted = false;
        double accepted_step = 0.0;
        if (measurable) {
            const auto value_at = [&](double step) {
                return weighted_objective(
                    sample, exp_map(current, TangentVector{current, -step * grad.components}),
                    alpha);
            };
            double step = opts.step_size;
            while (step > min_step) {
                const double candidate_value = value_at(step);
                if (candidate_value <=
                    current_value - 1e-4 * step * grad_norm * grad_norm) {
                    // A weak Armijo bound can admit an overshooting step with
                    // marginal gain; the half step often sits near the
                    // parabola bottom, so take whichever is lower.
                    const double halved_value = value_at(0.5 * step);
                    if (halved_value < candidate_value) step *= 0.5;
                    current = exp_map(current,
                                      TangentVector{current, -step * grad.components});
                    current_value = std::min(candidate_value, halved_value);
                    accepted = true;
                    accepted_step = step;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!accepted) {
            // Steps here may only shrink the gradient while leaving the
            // objective unchanged at floating-point resolution; anything
            // measurably worse is a step away from the optimum (e.g. off a
            // kink) and is rejected.
            const double slack = current_value +
                                 8.0 * std::numeric_limits<double>::epsilon() *
                                     std::max(current_value, 1e-30);
            const auto grad_at = [&](double step) {
                return norm(weighted_objective_gradient(
                    sample, exp_map(current, TangentVector{current, -step * grad.components}),
                    alpha, opts.median_smoothing));
            };
            double step = opts.step_size;
            while (step > min_step) {
                double best = grad_at(step);
                if (best < 0.99 * grad_norm) {
                    const double halved = grad_at(0.5 * step);
                    if (halved < best) {
                        step *= 0.5;
                        best = halved;
                    }
                    const ManifoldPoint candidate =
                        exp_map(current, TangentVector{current, -step * grad.components});
                    const double candidate_value = weighted_objective(sample, candidate, alpha);
                    if (candidate_value <= slack) {
                        current = candidate;
                        current_value = candidate_value;
                        accepted = true;
                        accepted_step = step;
                        break;
                    }
                }
                step *= 0.5;
            }
        }
        // Deep backtracking is the signature of a kink crawl.
        if (!accepted || accepted_step < opts.step_size * 0x1p-12) {
            if (try_kink_snap(current, current_value)) break;
        }
        if (!accepted) break;  // no measurable progress left
    }

    result.minimizer = current;
    result.objective_value = current_value;
    result.iterations = iter;
    if (!result.converged) {
        const TangentVector grad =
            weighted_objective_gradient(sample, current, alpha, opts.median_smoothing);
        result.final_gradient_norm = norm(grad);
        result.converged = result.final_gradient_norm <= opts.gradient_tolerance;
    }
    return result;
}

Vec stratification_weights(const std::vector<int>& z, const std::vector<int>& strata,
                           const Vec& lambda_hat, Group group) {
    const std::size_t n = z.size();
    if (strata.size() != n)
        throw ValidationError("stratification_weights: z and strata lengths differ");
    const int n_strata = static_cast<int>(lambda_hat.size());
    if (n_strata < 1) throw ValidationError("stratification_weights: no strata");
    if (std::abs(lambda_hat.sum() - 1.0) > 1e-12)
        throw ValidationError("stratification_weights: stratum weights do not sum to 1");
    for (int s = 0; s < n_strata; ++s) {
        if (lambda_hat[s] <= 0.0 || lambda_hat[s] > 1.0)
            throw ValidationError("stratification_weights: stratum weight outside (0,1]");
    }

    const int wanted = group == Group::Treated ? 1 : 0;
    std::vector<int> group_count(static_cast<std::size_t>(n_strata), 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (z[i] != 0 && z[i] != 1)
            throw ValidationError("stratification_weights: treatment flags must be 0 or 1");
        if (strata[i] < 1 || strata[i] > n_strata)
            throw ValidationError("stratification_weights: stratum label out of range");
        if (z[i] == wanted) ++group_count[static_cast<std::size_t>(strata[i] - 1)];
    }
    for (int s = 0; s < n_strata; ++s) {
        if (group_count[static_cast<std::size_t>(s)] == 0) {
            std::ostringstream msg;
            msg << "stratum " << (s + 1) << " has no "
                << (group == Group::Treated ? "treated" : "control") << " units";
            throw EstimationError(msg.str());
        }
    }

    Vec weights = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (z[i] != wanted) continue;
        const int s = strata[i] - 1;
        weights[static_cast<Eigen::Index>(i)] =
            lambda_hat[s] / static_cast<double>(group_count[static_cast<std::size_t>(s)]);
    }
    return weights;
}

UniquenessReport assess_uniqueness(const WeightedSample& sample, int alpha,
                                   const SolverOptions& opts, Rng& rng, int restarts) {
    validate_sample(sample);
    std::vector<SolverResult> runs;
    runs.push_back(weighted_l_alpha_estimator(sample, alpha, opts));
    for (int r = 0; r < restarts; ++r) {
        const std::size_t idx =
            static_cast<std::size_t>(rng.uniform_index(sample.points.size()));
        runs.push_back(weighted_l_alpha_estimator(sample, alpha, opts, sample.points[idx]));
    }
    UniquenessReport report;
    double best = std::numeric_limits<double>::infinity();
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& run : runs) {
        best = std::min(best, run.objective_value);
        worst = std::max(worst, run.objective_value);
    }
    report.objective_spread = worst - best;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            if (std::abs(runs[a].objective_value - runs[b].objective_value) > 1e-8) continue;
            report.max_minimizer_distance =
                std::max(report.max_minimizer_distance,
                         distance(runs[a].minimizer, runs[b].minimizer));
        }
    }
    report.ambiguous = report.max_minimizer_distance > 1e-4;
    return report;
}

}  // namespace mcausal
