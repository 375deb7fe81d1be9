#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcausal/estimands.hpp"
#include "mcausal/rng.hpp"

namespace mcausal {

struct IntervalEstimate {
    int alpha = 2;
    double level = 0.95;
    double lower = 0.0;
    double upper = 0.0;
    int replications = 0;
    double point = 0.0;   // plug-in estimate on the original data
    int redraws = 0;      // resamples discarded for an empty treated/control cell
    int solver_failures = 0;
};

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int permutations = 0;
    std::string method = "within-stratum-permutation";
};

// Rebuilds strata (and stratum weights) for a resampled unit list, e.g. by
// rerunning a matching pipeline on the covariates.
using RematchPipeline = std::function<StratifiedDataset(std::vector<Unit>)>;

// Percentile with linear interpolation between order statistics (the "type 7"
// convention). `sorted` must be ascending.
double type7_quantile(const std::vector<double>& sorted, double p);

// Pivotal bootstrap interval [2 theta - q_{1-d/2}, 2 theta - q_{d/2}],
// truncated below at 0. Resamples units with replacement; each resample's
// stratum weights are its empirical stratum proportions. When `rematch` is
// given, strata are rebuilt per resample from the covariates instead of
// reusing the resampled labels. Resamples with an empty treated or control
// cell are redrawn and counted.
IntervalEstimate bootstrap_pivotal_ci(const StratifiedDataset& data, int alpha, int n_boot,
                                      double level, const SolverOptions& opts, Rng& rng,
                                      const std::optional<RematchPipeline>& rematch = {},
                                      int n_threads = 1);

// Randomization test of the sharp null of no effect: outcomes and strata stay
// fixed, treatment labels are uniformly reassigned within each stratum
// (preserving the treated count), and the statistic is recomputed. Returns
// the add-one p-value (b + 1) / (n_perm + 1).
TestResult randomization_test(const StratifiedDataset& data, int alpha, int n_perm,
                              const SolverOptions& opts, Rng& rng, int n_threads = 1);

}  // namespace mcausal
