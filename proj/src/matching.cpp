#include "mcausal/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mcausal/errors.hpp"

namespace mcausal {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

Vec column_ranks(const Vec& column) {
    const Eigen::Index n = column.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return column[a] < column[b]; });
    Vec ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && column[order[static_cast<std::size_t>(j + 1)]] ==
                                column[order[static_cast<std::size_t>(i)]])
            ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // ties share the mean rank
        for (Eigen::Index k = i; k <= j; ++k)
            ranks[order[static_cast<std::size_t>(k)]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

PropensityModel estimate_propensity(const Mat& covariates, const std::vector<int>& z) {
    const Eigen::Index n = covariates.rows();
    const Eigen::Index k = covariates.cols();
    if (static_cast<Eigen::Index>(z.size()) != n)
        throw ValidationError("estimate_propensity: covariate rows and z length differ");
    if (n <= k + 1)
        throw ValidationError("estimate_propensity: need more units than coefficients");
    const int treated = std::accumulate(z.begin(), z.end(), 0);
    if (treated == 0 || treated == static_cast<int>(n))
        throw ValidationError("estimate_propensity: both treatment groups must be nonempty");

    Mat design(n, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = covariates;

    Vec y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = static_cast<double>(z[static_cast<std::size_t>(i)]);

    Vec beta = Vec::Zero(k + 1);
    beta[0] = logit(y.mean());
    constexpr int kMaxIter = 100;
    constexpr double kTol = 1e-8;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        const Vec eta = design * beta;
        const Vec mu = (1.0 + (-eta.array()).exp()).inverse();
        const Vec w = mu.array() * (1.0 - mu.array());
        Mat normal = design.transpose() * w.asDiagonal() * design;
        // Tiny Levenberg ridge keeps degenerate designs (e.g. constant
        // columns) solvable without visibly moving the optimum.
        normal.diagonal().array() += 1e-10;
        const Vec delta = normal.ldlt().solve(design.transpose() * (y - mu));
        beta += delta;
        if (delta.cwiseAbs().maxCoeff() < kTol) break;
        if (iter == kMaxIter - 1 || !beta.allFinite() || beta.cwiseAbs().maxCoeff() > 1e3) {
            // Diverging coefficients mean a separating direction exists.
            Vec direction = beta;
            direction[0] = 0.0;
            const double scale = direction.norm();
            if (scale > 0.0) direction /= scale;
            std::ostringstream msg;
            msg << "estimate_propensity: perfect separation along direction [";
            for (Eigen::Index j = 1; j < direction.size(); ++j)
                msg << (j > 1 ? ", " : "") << direction[j];
            msg << "]";
            throw MatchingError(msg.str());
        }
    }

    PropensityModel model;
    model.coefficients = beta;
    const Vec eta = design * beta;
    model.fitted_scores = (1.0 + (-eta.array()).exp()).inverse();
    // Keep scores strictly inside (0,1) so the logit stays finite.
    model.fitted_scores = model.fitted_scores.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
    return model;
}

Mat rank_mahalanobis(const Mat& covariates) {
    const Eigen::Index n = covariates.rows();
    const Eigen::Index k = covariates.cols();
    if (n < 2) throw ValidationError("rank_mahalanobis: need at least 2 units");

    Mat ranks(n, k);
    for (Eigen::Index j = 0; j < k; ++j) ranks.col(j) = column_ranks(covariates.col(j));

    const Vec mean = ranks.colwise().mean();
    const Mat centered = ranks.rowwise() - mean.transpose();
    Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::LDLT<Mat> solver(cov);
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
        cov.diagonal().array() += 1e-8;
        solver.compute(cov);
    }

    Mat dist = Mat::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Vec diff = ranks.row(a) - ranks.row(b);
            const double d2 = diff.dot(solver.solve(diff));
            dist(a, b) = dist(b, a) = std::sqrt(std::max(0.0, d2));
        }
    }
    return dist;
}

MatchResult full_match_caliper(const Mat& dist, const Vec& scores, const std::vector<int>& z,
                               double caliper) {
    const Eigen::Index n = dist.rows();
    if (dist.cols() != n || scores.size() != n ||
        static_cast<Eigen::Index>(z.size()) != n)
        throw ValidationError("full_match_caliper: dimension mismatch");
    if (caliper <= 0.0) throw ValidationError("full_match_caliper: caliper must be positive");

    Vec lscore(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (scores[i] <= 0.0 || scores[i] >= 1.0)
            throw ValidationError("full_match_caliper: scores must lie strictly in (0,1)");
        lscore[i] = logit(scores[i]);
    }
    const double sd =
        std::sqrt((lscore.array() - lscore.mean()).square().sum() /
                  static_cast<double>(n > 1 ? n - 1 : 1));
    const double width = caliper * (sd > 0.0 ? sd : 1.0);

    std::vector<int> treated, controls;
    for (Eigen::Index i = 0; i < n; ++i)
        (z[static_cast<std::size_t>(i)] == 1 ? treated : controls).push_back(static_cast<int>(i));
    if (treated.empty() || controls.empty())
        throw MatchingError("full_match_caliper: both groups must be nonempty");

    MatchResult result;
    result.stratum_of.assign(static_cast<std::size_t>(n), 0);

    // Process treated units from highest to lowest propensity, ties by index.
    std::sort(treated.begin(), treated.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    auto in_caliper = [&](int a, int b) { return std::abs(lscore[a] - lscore[b]) <= width; };
    auto nearest = [&](int from, const std::vector<int>& candidates,
                       auto&& eligible) -> int {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int c : candidates) {
            if (!eligible(c) || !in_caliper(from, c)) continue;
            const double d = dist(from, c);
            if (d < best_dist || (d == best_dist && (best == -1 || c < best))) {
                best_dist = d;
                best = c;
            }
        }
        return best;
    };

    std::vector<bool> control_used(static_cast<std::size_t>(n), false);
    for (int t : treated) {
        const int fresh =
            nearest(t, controls, [&](int c) { return !control_used[static_cast<std::size_t>(c)]; });
        if (fresh >= 0) {
            const int set = ++result.n_sets;
            result.stratum_of[static_cast<std::size_t>(t)] = set;
            result.stratum_of[static_cast<std::size_t>(fresh)] = set;
            control_used[static_cast<std::size_t>(fresh)] = true;
            continue;
        }
        // All in-caliper controls are taken; share the nearest one's set.
        const int shared =
            nearest(t, controls, [&](int c) { return control_used[static_cast<std::size_t>(c)]; });
        if (shared >= 0) {
            result.stratum_of[static_cast<std::size_t>(t)] =
                result.stratum_of[static_cast<std::size_t>(shared)];
        } else {
            result.unmatched.emplace_back(t, "no control within caliper");
        }
    }
    if (result.n_sets == 0)
        throw MatchingError(
            "full_match_caliper: no treated-control pair inside the caliper; widen it");

    // Attach leftover controls to the nearest in-caliper treated unit's set.
    for (int c : controls) {
        if (result.stratum_of[static_cast<std::size_t>(c)] != 0) continue;
        const int t = nearest(c, treated, [&](int t_idx) {
            return result.stratum_of[static_cast<std::size_t>(t_idx)] != 0;
        });
        if (t >= 0) {
            result.stratum_of[static_cast<std::size_t>(c)] =
                result.stratum_of[static_cast<std::size_t>(t)];
        } else {
            result.unmatched.emplace_back(c, "no treated unit within caliper");
        }
    }
    std::sort(result.unmatched.begin(), result.unmatched.end());
    return result;
}

std::vector<BalanceEntry> covariate_balance(const Mat& covariates, const std::vector<int>& z,
                                            const MatchResult& match) {
    const Eigen::Index n = covariates.rows();
    const Eigen::Index k = covariates.cols();
    std::vector<BalanceEntry> balance(static_cast<std::size_t>(k));

    std::vector<double> set_treated(static_cast<std::size_t>(match.n_sets + 1), 0.0);
    std::vector<double> set_control(static_cast<std::size_t>(match.n_sets + 1), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int set = match.stratum_of[static_cast<std::size_t>(i)];
        if (set == 0) continue;
        (z[static_cast<std::size_t>(i)] == 1 ? set_treated : set_control)
            [static_cast<std::size_t>(set)] += 1.0;
    }

    for (Eigen::Index j = 0; j < k; ++j) {
        double sum_t = 0.0, sum_c = 0.0, n_t = 0.0, n_c = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (z[static_cast<std::size_t>(i)] == 1) {
                sum_t += covariates(i, j);
                n_t += 1.0;
            } else {
                sum_c += covariates(i, j);
                n_c += 1.0;
            }
        }
        const double mean_t = sum_t / n_t;
        const double mean_c = sum_c / n_c;
        double var_t = 0.0, var_c = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = covariates(i, j) -
                             (z[static_cast<std::size_t>(i)] == 1 ? mean_t : mean_c);
            (z[static_cast<std::size_t>(i)] == 1 ? var_t : var_c) += d * d;
        }
        var_t /= std::max(1.0, n_t - 1.0);
        var_c /= std::max(1.0, n_c - 1.0);
        const double pooled = std::sqrt(0.5 * (var_t + var_c));
        const double denom = pooled > 0.0 ? pooled : 1.0;
        balance[static_cast<std::size_t>(j)].before = (mean_t - mean_c) / denom;

        double w_sum_t = 0.0, w_sum_c = 0.0, w_t = 0.0, w_c = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int set = match.stratum_of[static_cast<std::size_t>(i)];
            if (set == 0) continue;
            if (z[static_cast<std::size_t>(i)] == 1) {
                w_sum_t += covariates(i, j);
                w_t += 1.0;
            } else {
                const double w = set_treated[static_cast<std::size_t>(set)] /
                                 set_control[static_cast<std::size_t>(set)];
                w_sum_c += w * covariates(i, j);
                w_c += w;
            }
        }
        if (w_t > 0.0 && w_c > 0.0)
            balance[static_cast<std::size_t>(j)].after = (w_sum_t / w_t - w_sum_c / w_c) / denom;
    }
    return balance;
}

StratifiedDataset matched_dataset(const std::vector<Unit>& units, const MatchResult& match) {
    if (units.size() != match.stratum_of.size())
        throw ValidationError("matched_dataset: unit count differs from match result");
    StratifiedDataset data;
    data.n_strata = match.n_sets;
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (match.stratum_of[i] == 0) continue;
        Unit unit = units[i];
        unit.stratum = match.stratum_of[i];
        data.units.push_back(std::move(unit));
    }
    if (data.units.empty()) throw MatchingError("matched_dataset: nothing was matched");
    data.lambda_hat = empirical_stratum_weights(data.units, data.n_strata);
    return data;
}

StratifiedDataset match_units(const std::vector<Unit>& units, double caliper,
                              MatchResult* result_out) {
    if (units.empty()) throw ValidationError("match_units: no units");
    const Eigen::Index k = units.front().covariates.size();
    if (k == 0) throw ValidationError("match_units: units carry no covariates");
    Mat covariates(static_cast<Eigen::Index>(units.size()), k);
    std::vector<int> z;
    z.reserve(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        if (units[i].covariates.size() != k)
            throw ValidationError("match_units: covariate lengths differ");
        covariates.row(static_cast<Eigen::Index>(i)) = units[i].covariates.transpose();
        z.push_back(units[i].z);
    }
    const PropensityModel propensity = estimate_propensity(covariates, z);
    const Mat dist = rank_mahalanobis(covariates);
    MatchResult match = full_match_caliper(dist, propensity.fitted_scores, z, caliper);
    match.balance = covariate_balance(covariates, z, match);
    StratifiedDataset data = matched_dataset(units, match);
    if (result_out) *result_out = std::move(match);
    return data;
}

}  // namespace mcausal
