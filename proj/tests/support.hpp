#pragma once

// Shared helpers for the test suites: random points and tangents on each
// manifold, small synthetic datasets, and independent oracles.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mcausal/estimands.hpp"
#include "mcausal/geometry.hpp"
#include "mcausal/rng.hpp"

namespace mcausal::testing {

inline double gaussian(Rng& rng) {
    // Box-Muller; only used for test data.
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Vec gaussian_vec(Rng& rng, int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian(rng);
    return v;
}

inline ManifoldPoint random_point(const ManifoldKind& kind, Rng& rng) {
    switch (kind.tag()) {
        case ManifoldTag::Euclidean:
            return ManifoldPoint{kind, 2.0 * gaussian_vec(rng, kind.ambient_dim())};
        case ManifoldTag::Sphere2: {
            Vec v = gaussian_vec(rng, 3);
            v.normalize();
            return ManifoldPoint{kind, std::move(v)};
        }
        case ManifoldTag::Hyperbolic2: {
            Vec v(3);
            v[1] = rng.uniform(-1.5, 1.5);
            v[2] = rng.uniform(-1.5, 1.5);
            v[0] = std::sqrt(1.0 + v[1] * v[1] + v[2] * v[2]);
            return ManifoldPoint{kind, std::move(v)};
        }
        case ManifoldTag::KendallShape: {
            const int k = kind.landmarks();
            Eigen::Matrix<double, Eigen::Dynamic, 2> landmarks(k, 2);
            for (int j = 0; j < k; ++j) {
                landmarks(j, 0) = gaussian(rng);
                landmarks(j, 1) = gaussian(rng);
            }
            return kendall_preshape(landmarks);
        }
    }
    throw std::logic_error("unreachable");
}

// Random tangent vector with the requested norm.
inline TangentVector random_tangent(const ManifoldPoint& base, double target_norm, Rng& rng) {
    for (;;) {
        TangentVector v = project_to_tangent(base, gaussian_vec(rng, base.kind.ambient_dim()));
        const double n = norm(v);
        if (n < 1e-8) continue;
        return TangentVector{base, (target_norm / n) * v.components};
    }
}

// Small stratified dataset with two clusters of outcomes, suitable for any
// manifold. Treated outcomes scatter around exp_p(offset), controls around p.
inline StratifiedDataset random_dataset(const ManifoldKind& kind, int n_units, int n_strata,
                                        Rng& rng, double spread = 0.35,
                                        double separation = 1.0) {
    const ManifoldPoint anchor = random_point(kind, rng);
    const ManifoldPoint treated_center =
        exp_map(anchor, random_tangent(anchor, separation, rng));
    StratifiedDataset data;
    data.n_strata = n_strata;
    data.lambda_hat = Vec::Constant(n_strata, 1.0 / n_strata);
    for (int i = 0; i < n_units; ++i) {
        Unit unit;
        unit.id = "u" + std::to_string(i + 1);
        unit.stratum = 1 + static_cast<int>(rng.uniform_index(n_strata));
        unit.z = static_cast<int>(rng.uniform_index(2));
        const ManifoldPoint& center = unit.z == 1 ? treated_center : anchor;
        unit.outcome = exp_map(center, random_tangent(center, spread * rng.uniform01(), rng));
        data.units.push_back(std::move(unit));
    }
    // Guarantee both groups in every stratum.
    for (int s = 1; s <= n_strata; ++s) {
        for (int want : {0, 1}) {
            const bool present = [&] {
                for (const auto& u : data.units)
                    if (u.stratum == s && u.z == want) return true;
                return false;
            }();
            if (!present) {
                Unit unit;
                unit.id = "pad_s" + std::to_string(s) + "_z" + std::to_string(want);
                unit.stratum = s;
                unit.z = want;
                const ManifoldPoint& center = want == 1 ? treated_center : anchor;
                unit.outcome =
                    exp_map(center, random_tangent(center, spread * rng.uniform01(), rng));
                data.units.push_back(std::move(unit));
            }
        }
    }
    return data;
}

inline std::vector<ManifoldKind> all_kinds() {
    return {ManifoldKind::euclidean(3), ManifoldKind::sphere2(), ManifoldKind::hyperbolic2(),
            ManifoldKind::kendall_shape(10)};
}

// Brute-force minimization of the weighted L_alpha objective over a fine
// spherical grid, then a pattern search on (theta, phi); an implementation-
// independent reference for the sphere solver.
inline ManifoldPoint sphere_grid_oracle(const WeightedSample& sample, int alpha,
                                        double resolution = 0.002) {
    const auto s2 = ManifoldKind::sphere2();
    const auto at = [&](double theta, double phi) {
        Vec v(3);
        v << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta);
        return ManifoldPoint{s2, std::move(v)};
    };
    double best_value = std::numeric_limits<double>::infinity();
    double best_theta = 0.0, best_phi = 0.0;
    for (double theta = 0.0; theta <= std::numbers::pi; theta += resolution) {
        const double circumference =
            2.0 * std::numbers::pi * std::max(std::sin(theta), 1e-12);
        const int n_phi = std::max(1, static_cast<int>(circumference / resolution));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / n_phi;
            const double value = weighted_objective(sample, at(theta, phi), alpha);
            if (value < best_value) {
                best_value = value;
                best_theta = theta;
                best_phi = phi;
            }
        }
    }
    double step = resolution;
    while (step > 1e-8) {
        bool moved = false;
        for (const auto& [dt, dp] :
             {std::pair{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}}) {
            const double value =
                weighted_objective(sample, at(best_theta + dt, best_phi + dp), alpha);
            if (value < best_value) {
                best_value = value;
                best_theta += dt;
                best_phi += dp;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }
    return at(best_theta, best_phi);
}

// Injectivity radius guard used when drawing tangents for round trips.
inline double injectivity_bound(const ManifoldKind& kind) {
    switch (kind.tag()) {
        case ManifoldTag::Sphere2: return std::numbers::pi;
        case ManifoldTag::KendallShape: return std::numbers::pi / 2.0;
        default: return 6.0;  // unbounded; keep draws moderate
    }
}

}  // namespace mcausal::testing
