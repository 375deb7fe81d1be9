#pragma once

#include <cstdint>
#include <vector>

#include "mcausal/estimands.hpp"
#include "mcausal/geometry.hpp"
#include "mcausal/rng.hpp"

namespace mcausal {

// Draws from the density proportional to exp(-d(y, mu)^2 / (2 sigma2)) with
// respect to the Riemannian area measure, via inverse-CDF sampling of the
// polar radius (density exp(-r^2/2sigma2) * sin r or sinh r) and a uniform
// angle in the tangent plane at mu. Sphere2 and Hyperbolic2 only.
ManifoldPoint sample_riemannian_normal(const ManifoldKind& kind, const ManifoldPoint& mu,
                                       double sigma2, Rng& rng);

// Simulation scenarios: 1 and 2 are stratified randomized experiments on the
// sphere (two strata split on the sign of the first covariate, complete
// randomization within each stratum); 3 and 4 are observational designs on
// the hyperboloid (logistic treatment assignment, strata left to a matching
// step downstream).
struct ScenarioConfig {
    int scenario = 1;  // 1..4
    int n_units = 0;
    double sigma2 = 0.0;  // defaulted to (pi/8)^2 by make_scenario_config
    ManifoldKind manifold = ManifoldKind::sphere2();
    std::uint64_t seed = 0;  // used by the harness to derive replicate streams
    // Scales the covariate-driven tangent offsets; 0 removes covariate
    // effects entirely (diagnostic use).
    double tangent_effect_scale = 1.0;
};

ScenarioConfig make_scenario_config(int scenario, int n_units, double sigma2,
                                    std::uint64_t seed);
void validate_scenario_config(const ScenarioConfig& config);

// One replicate. Throws DegenerateReplicateError when a stratum (or, for
// scenarios 3-4, a whole treatment arm) comes out empty; the caller decides
// whether to resample.
StratifiedDataset generate_scenario(const ScenarioConfig& config, Rng& rng);

// Retries generate_scenario with fresh substreams of `rng` until it succeeds,
// counting discarded replicates.
StratifiedDataset generate_scenario_with_retries(const ScenarioConfig& config, Rng& rng,
                                                 int max_retries, int* n_resampled);

// Three-point stratified configuration on the sphere whose treated and
// control populations share the pole as center (true effect 0) while the
// per-stratum center-of-centers construction converges to a positive value.
// c is the common colatitude, in (0, pi/2).
StratifiedDataset example1_dataset(double c, int n_units, Rng& rng);

// Limit of the nested estimator on that configuration: 4t/3 - 2c/3, with t
// the colatitude of the two-point center in the second stratum, found by 1-D
// minimization along the meridian.
double example1_nested_limit(double c);

// Colatitude t above, exposed for reporting.
double example1_midpoint_colatitude(double c);

}  // namespace mcausal
