#include "mcausal/estimands.hpp"

#include <cmath>
#include <sstream>

namespace mcausal {

int StratifiedDataset::treated_count(int stratum) const {
    int count = 0;
    for (const auto& u : units) count += (u.stratum == stratum && u.z == 1) ? 1 : 0;
    return count;
}

int StratifiedDataset::control_count(int stratum) const {
    int count = 0;
    for (const auto& u : units) count += (u.stratum == stratum && u.z == 0) ? 1 : 0;
    return count;
}

void validate_dataset(const StratifiedDataset& data) {
    if (data.units.empty()) throw ValidationError("dataset has no units");
    if (data.n_strata < 1) throw ValidationError("dataset needs at least one stratum");
    if (data.lambda_hat.size() != data.n_strata)
        throw ValidationError("dataset has " + std::to_string(data.lambda_hat.size()) +
                              " stratum weights for " + std::to_string(data.n_strata) +
                              " strata");
    if (std::abs(data.lambda_hat.sum() - 1.0) > 1e-12)
        throw ValidationError("stratum weights do not sum to 1");
    const ManifoldKind& kind = data.units.front().outcome.kind;
    std::vector<int> treated(static_cast<std::size_t>(data.n_strata), 0);
    std::vector<int> control(static_cast<std::size_t>(data.n_strata), 0);
    for (const auto& u : data.units) {
        if (u.z != 0 && u.z != 1)
            throw ValidationError("unit " + u.id + ": treatment flag must be 0 or 1");
        if (u.stratum < 1 || u.stratum > data.n_strata)
            throw ValidationError("unit " + u.id + ": stratum label out of range");
        if (u.outcome.kind != kind)
            throw KindMismatchError("unit " + u.id + ": outcome manifold differs");
        validate_point(u.outcome);
        if (u.potential) {
            const ManifoldPoint& expected = u.z == 1 ? u.potential->first : u.potential->second;
            if ((u.outcome.coords - expected.coords).norm() != 0.0)
                throw ValidationError("unit " + u.id +
                                      ": observed outcome differs from its potential outcome");
        }
        (u.z == 1 ? treated : control)[static_cast<std::size_t>(u.stratum - 1)]++;
    }
    for (int s = 0; s < data.n_strata; ++s) {
        if (treated[static_cast<std::size_t>(s)] == 0)
            throw EstimationError("stratum " + std::to_string(s + 1) + " has no treated units");
        if (control[static_cast<std::size_t>(s)] == 0)
            throw EstimationError("stratum " + std::to_string(s + 1) + " has no control units");
    }
}

Vec empirical_stratum_weights(const std::vector<Unit>& units, int n_strata) {
    Vec weights = Vec::Zero(n_strata);
    for (const auto& u : units) {
        if (u.stratum < 1 || u.stratum > n_strata)
            throw ValidationError("empirical_stratum_weights: stratum label out of range");
        weights[u.stratum - 1] += 1.0;
    }
    if (weights.minCoeff() <= 0.0)
        throw ValidationError("empirical_stratum_weights: empty stratum");
    return weights / static_cast<double>(units.size());
}

namespace {

WeightedSample group_weighted_sample(const StratifiedDataset& data, Group group) {
    std::vector<int> z, strata;
    z.reserve(data.units.size());
    strata.reserve(data.units.size());
    for (const auto& u : data.units) {
        z.push_back(u.z);
        strata.push_back(u.stratum);
    }
    WeightedSample sample;
    sample.points.reserve(data.units.size());
    for (const auto& u : data.units) sample.points.push_back(u.outcome);
    sample.weights = stratification_weights(z, strata, data.lambda_hat, group);
    return sample;
}

}  // namespace

EffectEstimate estimate_t_alpha(const StratifiedDataset& data, int alpha,
                                const SolverOptions& opts,
                                const std::optional<ManifoldPoint>& treated_init,
                                const std::optional<ManifoldPoint>& control_init) {
    validate_dataset(data);
    const WeightedSample treated = group_weighted_sample(data, Group::Treated);
    const WeightedSample control = group_weighted_sample(data, Group::Control);

    EffectEstimate estimate;
    estimate.alpha = alpha;
    estimate.treated_solve = weighted_l_alpha_estimator(treated, alpha, opts, treated_init);
    estimate.control_solve = weighted_l_alpha_estimator(control, alpha, opts, control_init);
    estimate.treated_center = estimate.treated_solve.minimizer;
    estimate.control_center = estimate.control_solve.minimizer;
    estimate.value = distance(estimate.control_center, estimate.treated_center);
    return estimate;
}

EffectEstimate naive_nested_estimator(const StratifiedDataset& data, int alpha,
                                      const SolverOptions& opts) {
    validate_dataset(data);

    auto nested_center = [&](Group group) -> SolverResult {
        const int wanted = group == Group::Treated ? 1 : 0;
        WeightedSample centers;
        centers.weights = data.lambda_hat;
        for (int s = 1; s <= data.n_strata; ++s) {
            WeightedSample within;
            for (const auto& u : data.units) {
                if (u.stratum == s && u.z == wanted) within.points.push_back(u.outcome);
            }
            if (within.points.empty()) {
                std::ostringstream msg;
                msg << "stratum " << s << " has no "
                    << (group == Group::Treated ? "treated" : "control") << " units";
                throw EstimationError(msg.str());
            }
            within.weights =
                Vec::Constant(static_cast<Eigen::Index>(within.points.size()),
                              1.0 / static_cast<double>(within.points.size()));
            centers.points.push_back(weighted_l_alpha_estimator(within, alpha, opts).minimizer);
        }
        return weighted_l_alpha_estimator(centers, alpha, opts);
    };

    EffectEstimate estimate;
    estimate.alpha = alpha;
    estimate.treated_solve = nested_center(Group::Treated);
    estimate.control_solve = nested_center(Group::Control);
    estimate.treated_center = estimate.treated_solve.minimizer;
    estimate.control_center = estimate.control_solve.minimizer;
    estimate.value = distance(estimate.control_center, estimate.treated_center);
    return estimate;
}

}  // namespace mcausal
