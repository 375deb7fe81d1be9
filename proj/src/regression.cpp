#include "mcausal/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcausal {

namespace {

void check_regression_inputs(const std::vector<double>& xs, const std::vector<ManifoldPoint>& ys,
                             const Vec& weights, int alpha) {
    if (alpha != 1 && alpha != 2) throw ValidationError("alpha must be 1 or 2");
    if (xs.empty()) throw ValidationError("geodesic regression: empty data");
    if (xs.size() != ys.size() ||
        static_cast<Eigen::Index>(xs.size()) != weights.size())
        throw ValidationError("geodesic regression: xs, ys, weights lengths differ");
    if (weights.minCoeff() < 0.0) throw ValidationError("geodesic regression: negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw ValidationError("geodesic regression: weights do not sum to 1");
}

TangentVector scaled_tangent(const TangentVector& v, double s) {
    return TangentVector{v.base, s * v.components};
}

}  // namespace

double geodesic_regression_objective(const std::vector<double>& xs,
                                     const std::vector<ManifoldPoint>& ys, const Vec& weights,
                                     const ManifoldPoint& p, const TangentVector& v, int alpha,
                                     double /*median_smoothing*/) {
    double value = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = weights[static_cast<Eigen::Index>(i)];
        if (w == 0.0) continue;
        const ManifoldPoint fitted = exp_map(p, scaled_tangent(v, xs[i]));
        const double d = distance(fitted, ys[i]);
        value += w * (alpha == 2 ? d * d : d);
    }
    return value;
}

RegressionGradient geodesic_regression_gradient(const std::vector<double>& xs,
                                                const std::vector<ManifoldPoint>& ys,
                                                const Vec& weights, const ManifoldPoint& p,
                                                const TangentVector& v, int alpha,
                                                double median_smoothing) {
    Vec grad_p = Vec::Zero(p.kind.ambient_dim());
    Vec grad_v = Vec::Zero(p.kind.ambient_dim());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double w = weights[static_cast<Eigen::Index>(i)];
        if (w == 0.0) continue;
        const TangentVector step = scaled_tangent(v, xs[i]);
        const ManifoldPoint fitted = exp_map(p, step);
        const TangentVector residual = log_map(fitted, ys[i]);
        Vec u;  // gradient of d(., y_i)^alpha at the fitted point
        if (alpha == 2) {
            u = -2.0 * residual.components;
        } else {
            const double d = norm(residual);
            const double smoothed = std::sqrt(d * d + median_smoothing * median_smoothing);
            u = smoothed > 0.0 ? Vec(-residual.components / smoothed)
                               : Vec(Vec::Zero(residual.components.size()));
        }
        const TangentVector u_at_fit{fitted, std::move(u)};
        grad_p += w * adjoint_dexp_base(p, step, u_at_fit).components;
        grad_v += w * xs[i] * adjoint_dexp_velocity(p, step, u_at_fit).components;
    }
    return RegressionGradient{TangentVector{p, std::move(grad_p)},
                              TangentVector{p, std::move(grad_v)}};
}

GeodesicFit geodesic_regression_fit(
    const std::vector<double>& xs, const std::vector<ManifoldPoint>& ys, const Vec& weights,
    int alpha, const SolverOptions& opts,
    const std::optional<std::pair<ManifoldPoint, TangentVector>>& init) {
    check_regression_inputs(xs, ys, weights, alpha);
    validate_options(opts);

    const bool degenerate =
        std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); });
    if (degenerate) {
        WeightedSample sample{ys, weights};
        const SolverResult center = weighted_l_alpha_estimator(sample, alpha, opts);
        GeodesicFit fit;
        fit.base_point = center.minimizer;
        fit.direction = zero_tangent(center.minimizer);
        fit.alpha = alpha;
        fit.objective = center.objective_value;
        fit.converged = center.converged;
        fit.iterations = center.iterations;
        fit.final_gradient_norm = center.final_gradient_norm;
        return fit;
    }

    ManifoldPoint p = ys.front();
    TangentVector v = zero_tangent(p);
    if (init) {
        p = init->first;
        v = init->second;
        validate_tangent(v);
    } else {
        // Binary designs start from the two group centers; anything else
        // starts from the overall center with zero velocity.
        std::vector<double> levels(xs);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        if (levels.size() == 2) {
            auto level_center = [&](double level) {
                WeightedSample sub;
                Vec w(static_cast<Eigen::Index>(xs.size()));
                double total = 0.0;
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    const double wi =
                        xs[i] == level ? weights[static_cast<Eigen::Index>(i)] : 0.0;
                    w[static_cast<Eigen::Index>(i)] = wi;
                    total += wi;
                }
                sub.points = ys;
                sub.weights = w / total;
                return weighted_l_alpha_estimator(sub, alpha, opts).minimizer;
            };
            const ManifoldPoint lo = level_center(levels[0]);
            const ManifoldPoint hi = level_center(levels[1]);
            // exp_p(x v) must hit lo at x = levels[0] and hi at x = levels[1].
            const double span = levels[1] - levels[0];
            const TangentVector chord = log_map(lo, hi);
            v = TangentVector{lo, chord.components / span};
            p = exp_map(lo, scaled_tangent(v, -levels[0]));
            v = parallel_transport(lo, p, v);
        } else {
            WeightedSample sample{ys, weights};
            p = weighted_l_alpha_estimator(sample, alpha, opts).minimizer;
            v = zero_tangent(p);
        }
    }

    double value = geodesic_regression_objective(xs, ys, weights, p, v, alpha);
    const double min_step = opts.step_size * 1e-14;

    GeodesicFit fit;
    fit.alpha = alpha;
    const auto gradient_norm = [&](const RegressionGradient& g) {
        return std::sqrt(inner(g.base, g.base) + inner(g.velocity, g.velocity));
    };
    // Same two-pass backtracking as the center solver: sufficient decrease
    // while objective differences are measurable, then gradient-norm descent.
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        const RegressionGradient grad =
            geodesic_regression_gradient(xs, ys, weights, p, v, alpha, opts.median_smoothing);
        const double grad_norm = gradient_norm(grad);
        fit.final_gradient_norm = grad_norm;
        if (grad_norm <= opts.gradient_tolerance) {
            fit.converged = true;
            break;
        }
        const auto candidate_at = [&](double step) {
            const ManifoldPoint p_new =
                exp_map(p, TangentVector{p, -step * grad.base.components});
            TangentVector v_new{p, v.components - step * grad.velocity.components};
            v_new = parallel_transport(p, p_new, v_new);
            return std::make_pair(p_new, v_new);
        };
        const bool measurable = 1e-4 * opts.step_size * grad_norm * grad_norm >
                                8.0 * std::numeric_limits<double>::epsilon() *
                                    std::max(value, 1e-30);
        bool accepted = false;
        if (measurable) {
            double step = opts.step_size;
            while (step > min_step) {
                const auto [p_new, v_new] = candidate_at(step);
                const double candidate =
                    geodesic_regression_objective(xs, ys, weights, p_new, v_new, alpha);
                if (candidate <= value - 1e-4 * step * grad_norm * grad_norm) {
                    const auto [p_half, v_half] = candidate_at(0.5 * step);
                    const double halved =
                        geodesic_regression_objective(xs, ys, weights, p_half, v_half, alpha);
                    if (halved < candidate) {
                        p = p_half;
                        v = v_half;
                        value = halved;
                    } else {
                        p = p_new;
                        v = v_new;
                        value = candidate;
                    }
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
        }
        if (!accepted) {
            // Gradient-only steps must not leave the objective measurably
            // worse; see the center solver for the reasoning.
            const double slack = value + 8.0 * std::numeric_limits<double>::epsilon() *
                                             std::max(value, 1e-30);
            const auto grad_at = [&](double step) {
                const auto [p_new, v_new] = candidate_at(step);
                return gradient_norm(geodesic_regression_gradient(
                    xs, ys, weights, p_new, v_new, alpha, opts.median_smoothing));
            };
            double step = opts.step_size;
            while (step > min_step) {
                double best = grad_at(step);
                if (best < 0.99 * grad_norm) {
                    const double halved = grad_at(0.5 * step);
                    if (halved < best) step *= 0.5;
                    const auto [p_new, v_new] = candidate_at(step);
                    const double candidate =
                        geodesic_regression_objective(xs, ys, weights, p_new, v_new, alpha);
                    if (candidate <= slack) {
                        p = p_new;
                        v = v_new;
                        value = candidate;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
        }
        if (!accepted) break;
    }

    fit.base_point = p;
    fit.direction = v;
    fit.objective = value;
    fit.iterations = iter;
    if (!fit.converged) {
        const RegressionGradient grad =
            geodesic_regression_gradient(xs, ys, weights, p, v, alpha, opts.median_smoothing);
        fit.final_gradient_norm =
            std::sqrt(inner(grad.base, grad.base) + inner(grad.velocity, grad.velocity));
        fit.converged = fit.final_gradient_norm <= opts.gradient_tolerance;
    }
    return fit;
}

EquivalenceReport check_regression_equivalence(const StratifiedDataset& data, int alpha,
                                               double beta_t, const SolverOptions& opts) {
    validate_dataset(data);
    if (beta_t <= 0.0 || beta_t >= 1.0)
        throw ValidationError("beta_t must lie strictly between 0 and 1");
    const double beta_c = 1.0 - beta_t;

    std::vector<int> z, strata;
    for (const auto& u : data.units) {
        z.push_back(u.z);
        strata.push_back(u.stratum);
    }
    const Vec w_treated = stratification_weights(z, strata, data.lambda_hat, Group::Treated);
    const Vec w_control = stratification_weights(z, strata, data.lambda_hat, Group::Control);
    const Vec blended = beta_t * w_treated + beta_c * w_control;

    std::vector<double> xs(data.units.size());
    std::vector<ManifoldPoint> ys;
    ys.reserve(data.units.size());
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        xs[i] = static_cast<double>(data.units[i].z);
        ys.push_back(data.units[i].outcome);
    }

    const EffectEstimate reference = estimate_t_alpha(data, alpha, opts);

    // The optimum pairs the control center with the velocity reaching the
    // treated center, so that is where the fit starts.
    const TangentVector chord = log_map(reference.control_center, reference.treated_center);
    GeodesicFit fit = geodesic_regression_fit(
        xs, ys, blended, alpha, opts,
        std::make_pair(reference.control_center, chord));

    EquivalenceReport report;
    report.beta_t = beta_t;
    report.t_alpha = reference.value;
    report.norm_v = norm(fit.direction);
    report.gap = std::abs(report.norm_v - report.t_alpha);
    report.converged = fit.converged && reference.converged();

    if (report.gap > 1e-4) {
        // Retry from rescaled chords and the generic start; keep the best objective.
        report.multi_start_used = true;
        std::vector<std::optional<std::pair<ManifoldPoint, TangentVector>>> starts;
        for (const double scale : {0.5, 0.9, 1.1, 1.5}) {
            starts.push_back(std::make_pair(
                reference.control_center,
                TangentVector{reference.control_center, scale * chord.components}));
        }
        starts.emplace_back();  // the generic two-level start
        for (const auto& start : starts) {
            const GeodesicFit retry =
                geodesic_regression_fit(xs, ys, blended, alpha, opts, start);
            if (retry.objective < fit.objective) fit = retry;
        }
        report.norm_v = norm(fit.direction);
        report.gap = std::abs(report.norm_v - report.t_alpha);
        report.converged = fit.converged && reference.converged();
    }
    return report;
}

}  // namespace mcausal
