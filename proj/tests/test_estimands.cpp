#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "mcausal/estimands.hpp"
#include "support.hpp"

using namespace mcausal;
using namespace mcausal::testing;

namespace {

Unit make_unit(std::string id, int z, int stratum, ManifoldPoint outcome) {
    Unit unit;
    unit.id = std::move(id);
    unit.z = z;
    unit.stratum = stratum;
    unit.outcome = std::move(outcome);
    return unit;
}

ManifoldPoint euclid1(double x) {
    Vec v(1);
    v << x;
    return ManifoldPoint{ManifoldKind::euclidean(1), std::move(v)};
}

// Closed form for the Euclidean alpha = 2 case: || sum_s lambda_s
// (mean_T^s - mean_C^s) ||.
double euclidean_reference(const StratifiedDataset& data) {
    Vec total = Vec::Zero(data.kind().ambient_dim());
    for (int s = 1; s <= data.n_strata; ++s) {
        Vec mean_t = Vec::Zero(total.size()), mean_c = Vec::Zero(total.size());
        double n_t = 0.0, n_c = 0.0;
        for (const auto& u : data.units) {
            if (u.stratum != s) continue;
            if (u.z == 1) {
                mean_t += u.outcome.coords;
                n_t += 1.0;
            } else {
                mean_c += u.outcome.coords;
                n_c += 1.0;
            }
        }
        total += data.lambda_hat[s - 1] * (mean_t / n_t - mean_c / n_c);
    }
    return total.norm();
}

}  // namespace

TEST_CASE("real-line two-stratum arithmetic") {
    StratifiedDataset data;
    data.n_strata = 2;
    data.lambda_hat = Vec(2);
    data.lambda_hat << 0.5, 0.5;
    // Stratum means: treated (3, 5), control (1, 1).
    data.units = {
        make_unit("a", 1, 1, euclid1(2.0)), make_unit("b", 1, 1, euclid1(4.0)),
        make_unit("c", 0, 1, euclid1(1.0)), make_unit("d", 1, 2, euclid1(5.0)),
        make_unit("e", 0, 2, euclid1(0.0)), make_unit("f", 0, 2, euclid1(2.0)),
    };
    const EffectEstimate estimate = estimate_t_alpha(data, 2);
    CHECK(estimate.value == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(estimate.value ==
          doctest::Approx(distance(estimate.control_center, estimate.treated_center))
              .epsilon(1e-12));
}

TEST_CASE("identical outcomes give a zero effect") {
    Rng rng(11);
    for (const auto& kind : all_kinds()) {
        const ManifoldPoint q = random_point(kind, rng);
        StratifiedDataset data;
        data.n_strata = 1;
        data.lambda_hat = Vec::Constant(1, 1.0);
        for (int i = 0; i < 6; ++i)
            data.units.push_back(make_unit("u" + std::to_string(i), i % 2, 1, q));
        for (int alpha : {1, 2}) {
            const EffectEstimate estimate = estimate_t_alpha(data, alpha);
            CHECK(estimate.value < 1e-12);
        }
    }
}

TEST_CASE("euclidean reduction to the weighted mean difference") {
    Rng rng(29);
    for (int rep = 0; rep < 20; ++rep) {
        const StratifiedDataset data =
            random_dataset(ManifoldKind::euclidean(3), 24, 2, rng);
        const EffectEstimate estimate = estimate_t_alpha(data, 2);
        CHECK(estimate.value == doctest::Approx(euclidean_reference(data)).epsilon(1e-9));
    }
}

TEST_CASE("swapping group labels leaves the value unchanged") {
    Rng rng(37);
    const StratifiedDataset data = random_dataset(ManifoldKind::sphere2(), 20, 2, rng);
    StratifiedDataset flipped = data;
    for (auto& u : flipped.units) u.z = 1 - u.z;
    for (int alpha : {1, 2}) {
        const double a = estimate_t_alpha(data, alpha).value;
        const double b = estimate_t_alpha(flipped, alpha).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("scaling euclidean outcomes scales the effect") {
    Rng rng(43);
    const StratifiedDataset data = random_dataset(ManifoldKind::euclidean(3), 18, 2, rng);
    StratifiedDataset scaled = data;
    const double c = 3.7;
    for (auto& u : scaled.units) u.outcome.coords *= c;
    for (int alpha : {1, 2}) {
        const double base = estimate_t_alpha(data, alpha).value;
        const double big = estimate_t_alpha(scaled, alpha).value;
        CHECK(big == doctest::Approx(c * base).epsilon(1e-7));
    }
}

TEST_CASE("a global rotation of sphere outcomes changes nothing") {
    Rng rng(47);
    const StratifiedDataset data = random_dataset(ManifoldKind::sphere2(), 20, 2, rng);
    Eigen::Matrix3d rot;
    rot = Eigen::AngleAxisd(1.1, Eigen::Vector3d(1, 2, 3).normalized());
    StratifiedDataset rotated = data;
    for (auto& u : rotated.units) u.outcome.coords = rot * u.outcome.coords;
    for (int alpha : {1, 2}) {
        const double a = estimate_t_alpha(data, alpha).value;
        const double b = estimate_t_alpha(rotated, alpha).value;
        CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
}

TEST_CASE("nested estimator equals the stratified one when it should") {
    Rng rng(53);
    SUBCASE("single stratum") {
        const StratifiedDataset data = random_dataset(ManifoldKind::sphere2(), 16, 1, rng);
        for (int alpha : {1, 2}) {
            const double direct = estimate_t_alpha(data, alpha).value;
            const double nested = naive_nested_estimator(data, alpha).value;
            CHECK(std::abs(direct - nested) < 1e-9);
        }
    }
    SUBCASE("euclidean space, any strata") {
        const StratifiedDataset data = random_dataset(ManifoldKind::euclidean(3), 24, 3, rng);
        const double direct = estimate_t_alpha(data, 2).value;
        const double nested = naive_nested_estimator(data, 2).value;
        CHECK(std::abs(direct - nested) < 1e-9);
    }
}

TEST_CASE("dataset validation") {
    Rng rng(61);
    StratifiedDataset data = random_dataset(ManifoldKind::sphere2(), 12, 2, rng);
    SUBCASE("lambda must sum to one") {
        data.lambda_hat[0] += 0.25;
        CHECK_THROWS_AS(validate_dataset(data), ValidationError);
    }
    SUBCASE("stratum labels bounded") {
        data.units[0].stratum = 9;
        CHECK_THROWS_AS(validate_dataset(data), ValidationError);
    }
    SUBCASE("empty cell detected") {
        for (auto& u : data.units)
            if (u.stratum == 1) u.z = 1;
        CHECK_THROWS_AS(validate_dataset(data), EstimationError);
    }
    SUBCASE("potential outcomes must match the observed arm") {
        data.units[0].potential =
            std::make_pair(random_point(ManifoldKind::sphere2(), rng),
                           random_point(ManifoldKind::sphere2(), rng));
        CHECK_THROWS_AS(validate_dataset(data), ValidationError);
    }
}

TEST_CASE("empirical stratum weights") {
    Rng rng(71);
    const StratifiedDataset data = random_dataset(ManifoldKind::sphere2(), 20, 2, rng);
    const Vec weights = empirical_stratum_weights(data.units, 2);
    CHECK(std::abs(weights.sum() - 1.0) < 1e-12);
    int first = 0;
    for (const auto& u : data.units) first += u.stratum == 1 ? 1 : 0;
    CHECK(weights[0] ==
          doctest::Approx(static_cast<double>(first) / data.units.size()));
}
