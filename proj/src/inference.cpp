#include "mcausal/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcausal/parallel.hpp"

namespace mcausal {

double type7_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw ValidationError("type7_quantile: empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

bool has_empty_cell(const StratifiedDataset& data) {
    for (int s = 1; s <= data.n_strata; ++s) {
        if (data.treated_count(s) == 0 || data.control_count(s) == 0) return true;
    }
    return false;
}

}  // namespace

IntervalEstimate bootstrap_pivotal_ci(const StratifiedDataset& data, int alpha, int n_boot,
                                      double level, const SolverOptions& opts, Rng& rng,
                                      const std::optional<RematchPipeline>& rematch,
                                      int n_threads) {
    validate_dataset(data);
    if (n_boot < 100) throw ValidationError("bootstrap needs at least 100 resamples");
    if (level <= 0.0 || level >= 1.0) throw ValidationError("level must lie in (0,1)");

    IntervalEstimate interval;
    interval.alpha = alpha;
    interval.level = level;
    interval.replications = n_boot;
    const EffectEstimate observed = estimate_t_alpha(data, alpha, opts);
    interval.point = observed.value;

    const std::size_t n = data.units.size();
    std::vector<double> stats(static_cast<std::size_t>(n_boot));
    std::vector<int> redraws(static_cast<std::size_t>(n_boot), 0);
    std::vector<int> failures(static_cast<std::size_t>(n_boot), 0);

    parallel_for(n_boot, n_threads, [&](int b) {
        Rng stream = rng.substream(static_cast<std::uint64_t>(b));
        for (;;) {
            std::vector<Unit> resampled;
            resampled.reserve(n);
            for (std::size_t i = 0; i < n; ++i)
                resampled.push_back(data.units[stream.uniform_index(n)]);
            StratifiedDataset boot;
            try {
                if (rematch) {
                    boot = (*rematch)(std::move(resampled));
                } else {
                    boot.units = std::move(resampled);
                    boot.n_strata = data.n_strata;
                    boot.lambda_hat = empirical_stratum_weights(boot.units, data.n_strata);
                }
                if (has_empty_cell(boot)) throw DegenerateReplicateError("empty cell");
            } catch (const DegenerateReplicateError&) {
                ++redraws[static_cast<std::size_t>(b)];
                continue;
            } catch (const ValidationError&) {  // a stratum vanished entirely
                ++redraws[static_cast<std::size_t>(b)];
                continue;
            } catch (const MatchingError&) {
                ++redraws[static_cast<std::size_t>(b)];
                continue;
            }
            const EffectEstimate estimate = estimate_t_alpha(
                boot, alpha, opts, observed.treated_center, observed.control_center);
            if (!estimate.converged()) ++failures[static_cast<std::size_t>(b)];
            stats[static_cast<std::size_t>(b)] = estimate.value;
            break;
        }
    });

    interval.redraws = std::accumulate(redraws.begin(), redraws.end(), 0);
    interval.solver_failures = std::accumulate(failures.begin(), failures.end(), 0);

    std::sort(stats.begin(), stats.end());
    const double delta = 1.0 - level;
    const double q_hi = type7_quantile(stats, 1.0 - delta / 2.0);
    const double q_lo = type7_quantile(stats, delta / 2.0);
    interval.lower = std::max(0.0, 2.0 * interval.point - q_hi);
    interval.upper = std::max(interval.lower, 2.0 * interval.point - q_lo);
    return interval;
}

TestResult randomization_test(const StratifiedDataset& data, int alpha, int n_perm,
                              const SolverOptions& opts, Rng& rng, int n_threads) {
    validate_dataset(data);
    if (n_perm < 1) throw ValidationError("randomization test needs at least 1 permutation");

    TestResult result;
    result.permutations = n_perm;
    const EffectEstimate observed = estimate_t_alpha(data, alpha, opts);
    result.statistic = observed.value;

    // Stratum member lists are fixed across permutations.
    std::vector<std::vector<int>> members(static_cast<std::size_t>(data.n_strata));
    std::vector<std::size_t> treated_count(static_cast<std::size_t>(data.n_strata), 0);
    for (std::size_t i = 0; i < data.units.size(); ++i) {
        const auto s = static_cast<std::size_t>(data.units[i].stratum - 1);
        members[s].push_back(static_cast<int>(i));
        if (data.units[i].z == 1) ++treated_count[s];
    }

    std::vector<int> exceed(static_cast<std::size_t>(n_perm), 0);
    parallel_for(n_perm, n_threads, [&](int k) {
        Rng stream = rng.substream(static_cast<std::uint64_t>(k));
        StratifiedDataset permuted = data;
        for (std::size_t s = 0; s < members.size(); ++s) {
            std::vector<int> order = members[s];
            stream.shuffle(order);
            for (std::size_t j = 0; j < order.size(); ++j)
                permuted.units[static_cast<std::size_t>(order[j])].z =
                    j < treated_count[s] ? 1 : 0;
        }
        // Observed outcomes are held fixed under the sharp null, so the
        // stored potential pairs (if any) no longer describe the permuted
        // labels; drop them to keep the dataset self-consistent.
        for (auto& unit : permuted.units) unit.potential.reset();
        const double value = estimate_t_alpha(permuted, alpha, opts,
                                              observed.treated_center,
                                              observed.control_center)
                                 .value;
        exceed[static_cast<std::size_t>(k)] = value >= result.statistic ? 1 : 0;
    });

    const int b = std::accumulate(exceed.begin(), exceed.end(), 0);
    result.p_value = static_cast<double>(b + 1) / static_cast<double>(n_perm + 1);
    return result;
}

}  // namespace mcausal
