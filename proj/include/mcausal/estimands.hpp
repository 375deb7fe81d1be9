#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcausal/frechet.hpp"
#include "mcausal/geometry.hpp"

namespace mcausal {

// One experimental unit. `potential` carries both potential outcomes and is
// only populated by the simulation generators.
struct Unit {
    std::string id;
    int z = 0;           // 1 treated, 0 control
    int stratum = 1;     // 1..n_strata
    Vec covariates;      // may be empty
    ManifoldPoint outcome;
    std::optional<std::pair<ManifoldPoint, ManifoldPoint>> potential;  // (treated, control)
};

struct StratifiedDataset {
    std::vector<Unit> units;
    int n_strata = 1;
    Vec lambda_hat;  // one weight per stratum, summing to 1

    const ManifoldKind& kind() const { return units.front().outcome.kind; }
    int treated_count(int stratum) const;
    int control_count(int stratum) const;
};

// Checks stratum labels, weight normalization, nonempty treated/control cells
// in every stratum, and (when present) consistency of observed and potential
// outcomes.
void validate_dataset(const StratifiedDataset& data);

// m_s / N for each stratum.
Vec empirical_stratum_weights(const std::vector<Unit>& units, int n_strata);

struct EffectEstimate {
    int alpha = 2;
    double value = 0.0;  // distance between the two group centers
    ManifoldPoint treated_center;
    ManifoldPoint control_center;
    SolverResult treated_solve;
    SolverResult control_solve;

    bool converged() const { return treated_solve.converged && control_solve.converged; }
};

// The stratification-weighted estimator: both group centers are weighted
// L_alpha estimates over all units, with weights that give stratum s total
// mass lambda_hat[s] inside the requested group and 0 outside it. The
// optional warm starts skip the default initialization scan; resampling
// loops pass the centers of the source data.
EffectEstimate estimate_t_alpha(const StratifiedDataset& data, int alpha,
                                const SolverOptions& opts = {},
                                const std::optional<ManifoldPoint>& treated_init = {},
                                const std::optional<ManifoldPoint>& control_init = {});

// Center-of-centers construction: per-stratum group centers first, then a
// lambda_hat-weighted center of those. Coincides with estimate_t_alpha for a
// single stratum and on Euclidean space, but is inconsistent in general; kept
// as a negative control.
EffectEstimate naive_nested_estimator(const StratifiedDataset& data, int alpha,
                                      const SolverOptions& opts = {});

}  // namespace mcausal
