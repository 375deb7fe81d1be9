#include "mcausal/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mcausal {

namespace {

constexpr int kRadialGridSize = 4096;

// Inverse-CDF table for the polar radius of the Riemannian normal.
struct RadialTable {
    std::vector<double> r;
    std::vector<double> cdf;  // unnormalized cumulative trapezoid

    double sample(double u) const {
        const double target = u * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        const std::size_t hi = std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
        if (hi == 0) return r.front();
        const double span = cdf[hi] - cdf[hi - 1];
        const double frac = span > 0.0 ? (target - cdf[hi - 1]) / span : 0.0;
        return r[hi - 1] + frac * (r[hi] - r[hi - 1]);
    }
};

RadialTable build_radial_table(ManifoldTag tag, double sigma2) {
    const double sigma = std::sqrt(sigma2);
    // The grid only needs to cover where the density lives; past 12 sigma
    // (plus the sinh tilt on the hyperboloid) the tail mass is below 1e-16,
    // and shrinking the range keeps the resolution proportional to sigma.
    const double r_max = tag == ManifoldTag::Sphere2
                             ? std::min(std::numbers::pi, 12.0 * sigma)
                             : 12.0 * sigma + 1.5 * sigma2;
    RadialTable table;
    table.r.resize(kRadialGridSize);
    table.cdf.resize(kRadialGridSize);
    const double h = r_max / (kRadialGridSize - 1);
    double prev = 0.0;
    for (int j = 0; j < kRadialGridSize; ++j) {
        const double r = j * h;
        const double jac = tag == ManifoldTag::Sphere2 ? std::sin(r) : std::sinh(r);
        const double f = std::exp(-r * r / (2.0 * sigma2)) * jac;
        table.r[j] = r;
        table.cdf[j] = j == 0 ? 0.0 : table.cdf[j - 1] + 0.5 * h * (prev + f);
        prev = f;
    }
    return table;
}

const RadialTable& cached_radial_table(ManifoldTag tag, double sigma2) {
    thread_local ManifoldTag cached_tag = ManifoldTag::Euclidean;
    thread_local double cached_sigma2 = -1.0;
    thread_local RadialTable table;
    if (cached_sigma2 != sigma2 || cached_tag != tag) {
        table = build_radial_table(tag, sigma2);
        cached_tag = tag;
        cached_sigma2 = sigma2;
    }
    return table;
}

double minkowski(const Vec& a, const Vec& b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Orthonormal tangent basis at mu (Minkowski-orthonormal on the hyperboloid).
std::pair<Vec, Vec> tangent_basis(const ManifoldPoint& mu) {
    if (mu.kind.tag() == ManifoldTag::Sphere2) {
        const Vec3 m = mu.coords;
        Vec3 seed = std::abs(m.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        Vec3 b1 = (seed - m.dot(seed) * m).normalized();
        Vec3 b2 = m.cross(b1);
        return {b1, b2};
    }
    Vec seed1 = Vec::Zero(3), seed2 = Vec::Zero(3);
    seed1[1] = 1.0;
    seed2[2] = 1.0;
    Vec b1 = seed1 + minkowski(seed1, mu.coords) * mu.coords;
    b1 /= std::sqrt(minkowski(b1, b1));
    Vec b2 = seed2 + minkowski(seed2, mu.coords) * mu.coords;
    b2 -= minkowski(b2, b1) * b1;
    b2 /= std::sqrt(minkowski(b2, b2));
    return {b1, b2};
}

ManifoldPoint surface_point(const ManifoldKind& kind, double a, double b, double c) {
    Vec coords(3);
    coords << a, b, c;
    return ManifoldPoint{kind, std::move(coords)};
}

TangentVector surface_tangent(const ManifoldPoint& base, double a, double b, double c) {
    Vec components(3);
    components << a, b, c;
    return TangentVector{base, std::move(components)};
}

}  // namespace

ManifoldPoint sample_riemannian_normal(const ManifoldKind& kind, const ManifoldPoint& mu,
                                       double sigma2, Rng& rng) {
    if (kind.tag() != ManifoldTag::Sphere2 && kind.tag() != ManifoldTag::Hyperbolic2)
        throw ValidationError("sample_riemannian_normal supports Sphere2 and Hyperbolic2 only");
    if (mu.kind != kind) throw KindMismatchError("sample_riemannian_normal: center kind");
    if (sigma2 <= 0.0) throw ValidationError("sigma2 must be positive");
    validate_point(mu);

    const RadialTable& table = cached_radial_table(kind.tag(), sigma2);
    const double r = table.sample(rng.uniform01());
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const auto [b1, b2] = tangent_basis(mu);
    const Vec dir = std::cos(phi) * b1 + std::sin(phi) * b2;
    return exp_map(mu, TangentVector{mu, r * dir});
}

ScenarioConfig make_scenario_config(int scenario, int n_units, double sigma2,
                                    std::uint64_t seed) {
    ScenarioConfig config;
    config.scenario = scenario;
    config.n_units = n_units;
    config.sigma2 = sigma2 > 0.0 ? sigma2 : std::pow(std::numbers::pi / 8.0, 2);
    config.manifold =
        scenario <= 2 ? ManifoldKind::sphere2() : ManifoldKind::hyperbolic2();
    config.seed = seed;
    validate_scenario_config(config);
    return config;
}

void validate_scenario_config(const ScenarioConfig& config) {
    if (config.scenario < 1 || config.scenario > 4)
        throw ValidationError("scenario must be 1..4");
    if (config.n_units < 2) throw ValidationError("scenario needs at least 2 units");
    if (config.sigma2 <= 0.0) throw ValidationError("sigma2 must be positive");
    const bool randomized = config.scenario <= 2;
    if (randomized && config.manifold.tag() != ManifoldTag::Sphere2)
        throw ValidationError("scenarios 1-2 run on the sphere");
    if (!randomized && config.manifold.tag() != ManifoldTag::Hyperbolic2)
        throw ValidationError("scenarios 3-4 run on the hyperboloid");
    if (config.tangent_effect_scale < 0.0)
        throw ValidationError("tangent_effect_scale must be nonnegative");
}

StratifiedDataset generate_scenario(const ScenarioConfig& config, Rng& rng) {
    validate_scenario_config(config);
    const ManifoldKind& kind = config.manifold;
    const bool randomized = config.scenario <= 2;
    const int n = config.n_units;

    const ManifoldPoint base = surface_point(kind, 1.0, 0.0, 0.0);
    const ManifoldPoint zeta_t = exp_map(base, surface_tangent(base, 0.0, 1.0, 0.0));
    const ManifoldPoint zeta_c = exp_map(base, surface_tangent(base, 0.0, -1.0, 0.0));
    const double s = config.tangent_effect_scale;
    const Vec v1 = s * surface_tangent(base, 0.0, std::numbers::pi / 4.0, 0.0).components;
    const Vec v2 = s * surface_tangent(base, 0.0, 0.0, -std::numbers::pi / 6.0).components;

    StratifiedDataset data;
    data.units.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x1 = rng.uniform(-0.5, 0.5);
        const double x2 = rng.uniform(-0.5, 0.5);
        const TangentVector shift{base, x1 * v1 + x2 * v2};
        const ManifoldPoint center_t =
            exp_map(zeta_t, parallel_transport(base, zeta_t, shift));
        const ManifoldPoint center_c =
            exp_map(zeta_c, parallel_transport(base, zeta_c, shift));
        const ManifoldPoint y = sample_riemannian_normal(kind, base, config.sigma2, rng);
        const TangentVector noise = log_map(base, y);
        const ManifoldPoint r_t =
            exp_map(center_t, parallel_transport(base, center_t, noise));
        const ManifoldPoint r_c =
            exp_map(center_c, parallel_transport(base, center_c, noise));

        Unit unit;
        unit.id = "u" + std::to_string(i + 1);
        unit.covariates = Vec(2);
        unit.covariates << x1, x2;
        unit.stratum = randomized ? (x1 >= 0.0 ? 1 : 2) : 1;
        unit.potential = std::make_pair(r_t, r_c);
        unit.outcome = r_t;  // placeholder until treatment is assigned
        data.units.push_back(std::move(unit));
    }

    if (randomized) {
        // Complete randomization within each stratum: floor((m+1)/2) treated.
        for (int stratum = 1; stratum <= 2; ++stratum) {
            std::vector<int> members;
            for (int i = 0; i < n; ++i)
                if (data.units[static_cast<std::size_t>(i)].stratum == stratum)
                    members.push_back(i);
            rng.shuffle(members);
            const std::size_t n_treated = (members.size() + 1) / 2;
            for (std::size_t j = 0; j < members.size(); ++j)
                data.units[static_cast<std::size_t>(members[j])].z = j < n_treated ? 1 : 0;
        }
        data.n_strata = 2;
        data.lambda_hat = Vec(2);
        data.lambda_hat << 0.5, 0.5;
    } else {
        for (auto& unit : data.units) {
            const double pr =
                1.0 / (1.0 + std::exp(-unit.covariates[0] - unit.covariates[1]));
            unit.z = rng.bernoulli(pr) ? 1 : 0;
        }
        data.n_strata = 1;
        data.lambda_hat = Vec::Constant(1, 1.0);
    }

    for (auto& unit : data.units)
        unit.outcome = unit.z == 1 ? unit.potential->first : unit.potential->second;

    for (int stratum = 1; stratum <= data.n_strata; ++stratum) {
        if (data.treated_count(stratum) == 0 || data.control_count(stratum) == 0)
            throw DegenerateReplicateError("stratum " + std::to_string(stratum) +
                                           " has an empty treated or control cell");
    }
    return data;
}

StratifiedDataset generate_scenario_with_retries(const ScenarioConfig& config, Rng& rng,
                                                 int max_retries, int* n_resampled) {
    if (n_resampled) *n_resampled = 0;
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        Rng stream = rng.substream(static_cast<std::uint64_t>(attempt));
        try {
            return generate_scenario(config, stream);
        } catch (const DegenerateReplicateError&) {
            if (attempt == max_retries) throw;
            if (n_resampled) ++(*n_resampled);
        }
    }
    throw DegenerateReplicateError("unreachable");
}

StratifiedDataset example1_dataset(double c, int n_units, Rng& rng) {
    if (c <= 0.0 || c >= std::numbers::pi / 2.0)
        throw ValidationError("example1_dataset: c must lie in (0, pi/2)");
    if (n_units < 4) throw ValidationError("example1_dataset: need at least 4 units");
    const ManifoldKind kind = ManifoldKind::sphere2();
    const double sc = std::sin(c);
    const double cc = std::cos(c);
    const double half = 0.5 * sc;
    const double lat = std::sqrt(3.0) / 2.0 * sc;

    // Treated outcomes at colatitude c, longitudes 0/120/240 degrees; controls
    // are their mirror images across the x = 0 plane. Stratum 1 holds the
    // first configuration, stratum 2 the other two.
    struct Config {
        ManifoldPoint r_t, r_c;
        int stratum;
    };
    const std::vector<Config> configs = {
        {surface_point(kind, sc, 0.0, cc), surface_point(kind, -sc, 0.0, cc), 1},
        {surface_point(kind, -half, lat, cc), surface_point(kind, half, lat, cc), 2},
        {surface_point(kind, -half, -lat, cc), surface_point(kind, half, -lat, cc), 2},
    };

    StratifiedDataset data;
    data.n_strata = 2;
    data.lambda_hat = Vec(2);
    data.lambda_hat << 1.0 / 3.0, 2.0 / 3.0;
    data.units.reserve(static_cast<std::size_t>(n_units));
    for (int i = 0; i < n_units; ++i) {
        const auto& config = configs[rng.uniform_index(3)];
        Unit unit;
        unit.id = "u" + std::to_string(i + 1);
        unit.stratum = config.stratum;
        unit.potential = std::make_pair(config.r_t, config.r_c);
        unit.outcome = config.r_t;
        data.units.push_back(std::move(unit));
    }
    for (int stratum = 1; stratum <= 2; ++stratum) {
        std::vector<int> members;
        for (int i = 0; i < n_units; ++i)
            if (data.units[static_cast<std::size_t>(i)].stratum == stratum)
                members.push_back(i);
        rng.shuffle(members);
        const std::size_t n_treated = (members.size() + 1) / 2;
        for (std::size_t j = 0; j < members.size(); ++j)
            data.units[static_cast<std::size_t>(members[j])].z = j < n_treated ? 1 : 0;
    }
    for (auto& unit : data.units)
        unit.outcome = unit.z == 1 ? unit.potential->first : unit.potential->second;
    for (int stratum = 1; stratum <= 2; ++stratum) {
        if (data.treated_count(stratum) == 0 || data.control_count(stratum) == 0)
            throw DegenerateReplicateError("example1 stratum " + std::to_string(stratum) +
                                           " has an empty cell");
    }
    return data;
}

double example1_midpoint_colatitude(double c) {
    const ManifoldKind kind = ManifoldKind::sphere2();
    const double sc = std::sin(c);
    const double cc = std::cos(c);
    const ManifoldPoint pb = surface_point(kind, -0.5 * sc, std::sqrt(3.0) / 2.0 * sc, cc);
    const ManifoldPoint pc = surface_point(kind, -0.5 * sc, -std::sqrt(3.0) / 2.0 * sc, cc);
    const auto objective = [&](double tau) {
        const ManifoldPoint m = surface_point(kind, -std::sin(tau), 0.0, std::cos(tau));
        const double db = distance(m, pb);
        const double dc = distance(m, pc);
        return db * db + dc * dc;
    };
    // Golden-section search along the meridian.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = std::numbers::pi / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-12) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        }
    }
    return 0.5 * (lo + hi);
}

double example1_nested_limit(double c) {
    const double t = example1_midpoint_colatitude(c);
    return 4.0 * t / 3.0 - 2.0 * c / 3.0;
}

}  // namespace mcausal
