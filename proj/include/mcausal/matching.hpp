#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mcausal/estimands.hpp"
#include "mcausal/linalg.hpp"

namespace mcausal {

struct PropensityModel {
    Vec coefficients;   // intercept first, then one per covariate
    Vec fitted_scores;  // strictly inside (0,1)
};

// Maximum-likelihood logistic regression via iteratively reweighted least
// squares. Throws MatchingError naming the separating direction when the
// groups are perfectly separable.
PropensityModel estimate_propensity(const Mat& covariates, const std::vector<int>& z);

// Mahalanobis distances computed on per-column ranks (ties averaged), making
// the matrix invariant under strictly monotone transformations of any
// covariate. A singular rank covariance gets a 1e-8 ridge.
Mat rank_mahalanobis(const Mat& covariates);

struct BalanceEntry {
    double before = 0.0;  // standardized difference before matching
    double after = 0.0;   // weighted standardized difference on matched sets
};

struct MatchResult {
    std::vector<int> stratum_of;  // 1..n_sets for matched units, 0 for unmatched
    int n_sets = 0;
    std::vector<BalanceEntry> balance;                    // one per covariate
    std::vector<std::pair<int, std::string>> unmatched;   // unit index, reason
};

// Greedy caliper-constrained full matching. Treated units are processed in
// descending propensity order and paired with the nearest unused control
// whose logit-propensity lies within `caliper` pooled standard deviations;
// treated units whose unused candidates are exhausted join the set of the
// nearest in-caliper control instead. Leftover controls then attach to the
// nearest in-caliper treated unit's set. Every matched set contains at least
// one treated and one control unit.
MatchResult full_match_caliper(const Mat& dist, const Vec& scores, const std::vector<int>& z,
                               double caliper);

// Standardized differences (mean_T - mean_C) / pooled sd per covariate,
// before matching and on the matched sets (controls reweighted so each set
// contributes its treated count; the pre-matching pooled sd stays the
// denominator so the two columns are comparable).
std::vector<BalanceEntry> covariate_balance(const Mat& covariates, const std::vector<int>& z,
                                            const MatchResult& match);

// Replaces unit strata with matched-set labels, drops unmatched units, and
// sets the stratum weights to the matched-set proportions.
StratifiedDataset matched_dataset(const std::vector<Unit>& units, const MatchResult& match);

// Convenience pipeline: propensity fit, rank-based Mahalanobis distances,
// greedy full matching, matched dataset.
StratifiedDataset match_units(const std::vector<Unit>& units, double caliper,
                              MatchResult* result_out = nullptr);

}  // namespace mcausal
