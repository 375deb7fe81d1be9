#include "mcausal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mcausal {

namespace {

constexpr double kInvariantTol = 1e-9;
constexpr double kNearZero = 1e-12;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Minkowski form with signature (-,+,+); the first coordinate is time-like.
double minkowski(const Vec& a, const Vec& b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

void require_same_kind(const ManifoldKind& a, const ManifoldKind& b, const char* op) {
    if (a != b) {
        std::ostringstream msg;
        msg << op << ": manifold kinds differ (" << a.name() << " vs " << b.name() << ")";
        throw KindMismatchError(msg.str());
    }
}

std::complex<double> hermitian_inner(const Vec& a, const Vec& b) {
    return as_complex(a).dot(as_complex(b));  // Eigen's dot conjugates the left argument
}

// Multiplication by i in interleaved coordinates: (x, y) -> (-y, x).
Vec times_i(const Vec& v) {
    Vec out(v.size());
    for (Eigen::Index j = 0; j < v.size(); j += 2) {
        out[j] = -v[j + 1];
        out[j + 1] = v[j];
    }
    return out;
}

Vec center_interleaved(Vec v) {
    const Eigen::Index k = v.size() / 2;
    double mx = 0.0, my = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        mx += v[2 * j];
        my += v[2 * j + 1];
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        v[2 * j] -= mx;
        v[2 * j + 1] -= my;
    }
    return v;
}

}  // namespace

ManifoldKind ManifoldKind::euclidean(int dim) {
    if (dim < 1) throw ValidationError("Euclidean dimension must be >= 1");
    return ManifoldKind(ManifoldTag::Euclidean, dim);
}

ManifoldKind ManifoldKind::kendall_shape(int landmarks) {
    if (landmarks < 3) throw ValidationError("Kendall shape space needs K >= 3 landmarks");
    return ManifoldKind(ManifoldTag::KendallShape, landmarks);
}

int ManifoldKind::ambient_dim() const {
    switch (tag_) {
        case ManifoldTag::Euclidean: return param_;
        case ManifoldTag::Sphere2:
        case ManifoldTag::Hyperbolic2: return 3;
        case ManifoldTag::KendallShape: return 2 * param_;
    }
    return 0;
}

int ManifoldKind::landmarks() const {
    if (tag_ != ManifoldTag::KendallShape)
        throw ValidationError("landmarks() is only defined for Kendall shape space");
    return param_;
}

int ManifoldKind::euclidean_dim() const {
    if (tag_ != ManifoldTag::Euclidean)
        throw ValidationError("euclidean_dim() is only defined for Euclidean space");
    return param_;
}

std::string ManifoldKind::name() const {
    switch (tag_) {
        case ManifoldTag::Euclidean: return "euclidean(" + std::to_string(param_) + ")";
        case ManifoldTag::Sphere2: return "sphere2";
        case ManifoldTag::Hyperbolic2: return "hyperbolic2";
        case ManifoldTag::KendallShape: return "kendall(" + std::to_string(param_) + ")";
    }
    return "unknown";
}

void validate_point(const ManifoldPoint& p) {
    if (p.coords.size() != p.kind.ambient_dim())
        throw ValidationError("point has " + std::to_string(p.coords.size()) +
                              " coordinates, expected " + std::to_string(p.kind.ambient_dim()) +
                              " for " + p.kind.name());
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            break;
        case ManifoldTag::Sphere2:
            if (std::abs(p.coords.norm() - 1.0) > kInvariantTol)
                throw ValidationError("sphere point is not unit-norm");
            break;
        case ManifoldTag::Hyperbolic2:
            if (std::abs(minkowski(p.coords, p.coords) + 1.0) > kInvariantTol)
                throw ValidationError("hyperboloid point violates -x^2+y^2+z^2=-1");
            if (p.coords[0] <= 0.0)
                throw ValidationError("hyperboloid point is on the wrong sheet (x <= 0)");
            break;
        case ManifoldTag::KendallShape: {
            if (std::abs(p.coords.norm() - 1.0) > kInvariantTol)
                throw ValidationError("preshape is not unit-norm");
            if (std::abs(as_complex(p.coords).sum()) > kInvariantTol)
                throw ValidationError("preshape is not centered");
            break;
        }
    }
}

void validate_tangent(const TangentVector& v) {
    validate_point(v.base);
    if (v.components.size() != v.kind().ambient_dim())
        throw ValidationError("tangent vector dimension mismatch");
    switch (v.kind().tag()) {
        case ManifoldTag::Euclidean:
            break;
        case ManifoldTag::Sphere2:
            if (std::abs(v.base.coords.dot(v.components)) > kInvariantTol)
                throw ValidationError("sphere tangent vector is not orthogonal to its base");
            break;
        case ManifoldTag::Hyperbolic2:
            if (std::abs(minkowski(v.base.coords, v.components)) > kInvariantTol)
                throw ValidationError("hyperboloid tangent vector is not Minkowski-orthogonal");
            break;
        case ManifoldTag::KendallShape:
            if (std::abs(hermitian_inner(v.base.coords, v.components)) > kInvariantTol)
                throw ValidationError("shape tangent vector is not horizontal");
            if (std::abs(as_complex(v.components).sum()) > kInvariantTol)
                throw ValidationError("shape tangent vector is not centered");
            break;
    }
}

double inner(const TangentVector& a, const TangentVector& b) {
    require_same_kind(a.kind(), b.kind(), "inner");
    if (a.kind().tag() == ManifoldTag::Hyperbolic2)
        return minkowski(a.components, b.components);
    return a.components.dot(b.components);
}

double norm(const TangentVector& v) {
    if (v.kind().tag() == ManifoldTag::Hyperbolic2)
        return std::sqrt(std::max(0.0, minkowski(v.components, v.components)));
    return v.components.norm();
}

TangentVector make_tangent(const ManifoldPoint& base, Vec components) {
    TangentVector v{base, std::move(components)};
    validate_tangent(v);
    return v;
}

TangentVector project_to_tangent(const ManifoldPoint& base, const Vec& ambient) {
    validate_point(base);
    if (ambient.size() != base.kind.ambient_dim())
        throw ValidationError("ambient vector dimension mismatch");
    switch (base.kind.tag()) {
        case ManifoldTag::Euclidean:
            return TangentVector{base, ambient};
        case ManifoldTag::Sphere2:
            return TangentVector{base, ambient - base.coords.dot(ambient) * base.coords};
        case ManifoldTag::Hyperbolic2:
            return TangentVector{base, ambient + minkowski(ambient, base.coords) * base.coords};
        case ManifoldTag::KendallShape: {
            Vec centered = center_interleaved(ambient);
            const std::complex<double> c = hermitian_inner(base.coords, centered);
            Vec out = centered - from_complex(c * as_complex(base.coords));
            return TangentVector{base, std::move(out)};
        }
    }
    throw ValidationError("unreachable");
}

TangentVector zero_tangent(const ManifoldPoint& base) {
    return TangentVector{base, Vec::Zero(base.kind.ambient_dim())};
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace

double distance(const ManifoldPoint& p, const ManifoldPoint& q) {
    require_same_kind(p.kind, q.kind, "distance");
    validate_point(p);
    validate_point(q);
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            return (p.coords - q.coords).norm();
        case ManifoldTag::Sphere2: {
            // atan2 of (sin, cos) stays accurate where acos loses digits.
            const Vec3 a = p.coords, b = q.coords;
            return std::atan2(a.cross(b).norm(), clamp_unit(a.dot(b)));
        }
        case ManifoldTag::Hyperbolic2: {
            // Chordal form 2 asinh(|p-q|_M / 2); immune to the cancellation
            // that makes acosh(-<p,q>) lose half its digits near 0.
            const Vec delta = p.coords - q.coords;
            return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, minkowski(delta, delta))));
        }
        case ManifoldTag::KendallShape: {
            // Arguments ordered so the result is bit-exactly symmetric.
            const Vec& a = lex_less(q.coords, p.coords) ? q.coords : p.coords;
            const Vec& b = (&a == &p.coords) ? q.coords : p.coords;
            const std::complex<double> s = as_complex(a).dot(as_complex(b));
            const double rho = std::min(1.0, std::abs(s));
            if (rho < kNearZero) return std::numbers::pi / 2.0;
            const Vec aligned = from_complex((std::conj(s) / rho) * as_complex(b));
            const Vec diff = aligned - a;
            const double cm1 = hermitian_inner(a, diff).real();  // rho - 1, stably
            const Vec u = diff - cm1 * a;
            return std::atan2(u.norm(), rho);
        }
    }
    throw ValidationError("unreachable");
}

ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) {
    require_same_kind(p.kind, v.kind(), "exp_map");
    validate_tangent(v);
    if ((v.base.coords - p.coords).norm() > kInvariantTol)
        throw ValidationError("exp_map: tangent vector is not based at p");
    validate_point(p);
    const double speed = norm(v);
    if (speed < kNearZero) return p;
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            return ManifoldPoint{p.kind, p.coords + v.components};
        case ManifoldTag::Sphere2: {
            Vec out = std::cos(speed) * p.coords + (std::sin(speed) / speed) * v.components;
            out.normalize();
            return ManifoldPoint{p.kind, std::move(out)};
        }
        case ManifoldTag::Hyperbolic2: {
            Vec out = std::cosh(speed) * p.coords + (std::sinh(speed) / speed) * v.components;
            out[0] = std::sqrt(1.0 + out[1] * out[1] + out[2] * out[2]);
            return ManifoldPoint{p.kind, std::move(out)};
        }
        case ManifoldTag::KendallShape: {
            Vec out = std::cos(speed) * p.coords + (std::sin(speed) / speed) * v.components;
            out = center_interleaved(std::move(out));
            out /= out.norm();
            return ManifoldPoint{p.kind, std::move(out)};
        }
    }
    throw ValidationError("unreachable");
}

TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) {
    require_same_kind(p.kind, q.kind, "log_map");
    validate_point(p);
    validate_point(q);
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            return TangentVector{p, q.coords - p.coords};
        case ManifoldTag::Sphere2: {
            const Vec diff = q.coords - p.coords;
            const double cm1 = p.coords.dot(diff);  // cos(theta) - 1, stably
            const double c = 1.0 + cm1;
            if (c < -1.0 + kNearZero)
                throw CutLocusError("log_map: antipodal sphere points have no unique geodesic");
            const Vec u = diff - cm1 * p.coords;
            const double sn = u.norm();
            const double theta = std::atan2(sn, c);
            if (theta < kNearZero) return zero_tangent(p);
            return TangentVector{p, (theta / sn) * u};
        }
        case ManifoldTag::Hyperbolic2: {
            const Vec diff = q.coords - p.coords;
            const double cm1 = -minkowski(p.coords, diff);  // cosh(theta) - 1, stably
            const Vec u = diff - cm1 * p.coords;
            const double sn = std::sqrt(std::max(0.0, minkowski(u, u)));
            const double theta = std::asinh(sn);
            if (theta < kNearZero) return zero_tangent(p);
            return TangentVector{p, (theta / sn) * u};
        }
        case ManifoldTag::KendallShape: {
            const std::complex<double> s = hermitian_inner(p.coords, q.coords);
            const double rho = std::min(1.0, std::abs(s));
            if (rho < kNearZero)
                throw CutLocusError("log_map: shapes at distance pi/2 are on the cut locus");
            // Rotate q so its inner product with p is real and positive.
            const Vec aligned = from_complex((std::conj(s) / rho) * as_complex(q.coords));
            const Vec diff = aligned - p.coords;
            const double cm1 = hermitian_inner(p.coords, diff).real();  // rho - 1, stably
            const Vec u = diff - cm1 * p.coords;
            const double sn = u.norm();
            const double theta = std::atan2(sn, rho);
            if (theta < kNearZero) return zero_tangent(p);
            return TangentVector{p, (theta / sn) * u};
        }
    }
    throw ValidationError("unreachable");
}

TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v) {
    require_same_kind(p.kind, q.kind, "parallel_transport");
    require_same_kind(p.kind, v.kind(), "parallel_transport");
    validate_tangent(v);
    if ((v.base.coords - p.coords).norm() > kInvariantTol)
        throw ValidationError("parallel_transport: vector is not based at p");
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            validate_point(q);
            return TangentVector{q, v.components};
        case ManifoldTag::Sphere2: {
            const TangentVector dir = log_map(p, q);  // validates p, q; throws at the cut locus
            const double theta = dir.components.norm();
            if (theta < kNearZero) return project_to_tangent(q, v.components);
            const Vec e = dir.components / theta;
            const double a = v.components.dot(e);
            const Vec w = v.components - a * e;
            const Vec e_q = -std::sin(theta) * p.coords + std::cos(theta) * e;
            return TangentVector{q, a * e_q + w};
        }
        case ManifoldTag::Hyperbolic2: {
            const TangentVector dir = log_map(p, q);
            const double theta = norm(dir);
            if (theta < kNearZero) return project_to_tangent(q, v.components);
            const Vec e = dir.components / theta;
            const double a = minkowski(v.components, e);
            const Vec w = v.components - a * e;
            const Vec e_q = std::sinh(theta) * p.coords + std::cosh(theta) * e;
            return TangentVector{q, a * e_q + w};
        }
        case ManifoldTag::KendallShape: {
            validate_point(q);
            const std::complex<double> s = hermitian_inner(p.coords, q.coords);
            const double rho = std::min(1.0, std::abs(s));
            if (rho < kNearZero)
                throw CutLocusError("parallel_transport: shapes at distance pi/2");
            const std::complex<double> phase = s / rho;  // q = phase * aligned representative
            const Vec aligned = from_complex((std::conj(s) / rho) * as_complex(q.coords));
            const Vec diff = aligned - p.coords;
            const double cm1 = hermitian_inner(p.coords, diff).real();
            Vec e = diff - cm1 * p.coords;
            const double sn = e.norm();
            const double theta = std::atan2(sn, rho);
            if (theta < kNearZero) {
                // Same shape; only the representative's rotation frame changes.
                return project_to_tangent(q, from_complex(phase * as_complex(v.components)));
            }
            e /= sn;
            // Complex coefficient along the geodesic direction; the remainder
            // is complex-orthogonal to both p and e and transports unchanged.
            const std::complex<double> c = hermitian_inner(e, v.components);
            const Vec w = v.components - from_complex(c * as_complex(e));
            const Vec e_q = -std::sin(theta) * p.coords + std::cos(theta) * e;
            Vec out = w + from_complex(c * as_complex(e_q));
            return TangentVector{q, from_complex(phase * as_complex(out))};
        }
    }
    throw ValidationError("unreachable");
}

ManifoldPoint kendall_preshape(const Eigen::Matrix<double, Eigen::Dynamic, 2>& landmarks) {
    const int k = static_cast<int>(landmarks.rows());
    const ManifoldKind kind = ManifoldKind::kendall_shape(k);
    Vec coords(2 * k);
    for (int j = 0; j < k; ++j) {
        coords[2 * j] = landmarks(j, 0);
        coords[2 * j + 1] = landmarks(j, 1);
    }
    const double raw_norm = coords.norm();
    coords = center_interleaved(std::move(coords));
    const double centered_norm = coords.norm();
    if (centered_norm <= 1e-12 * std::max(1.0, raw_norm))
        throw ValidationError("kendall_preshape: degenerate configuration (all landmarks equal)");
    coords /= centered_norm;
    return ManifoldPoint{kind, std::move(coords)};
}

namespace {

// Shared skeleton for the two exp-map adjoints. Factors scale the
// eigencomponents of the Jacobi operator along the geodesic t -> exp_p(t w).
struct JacobiFactors {
    double along;       // component parallel to the geodesic direction
    double rotational;  // i * direction component (shape space only)
    double normal;      // everything orthogonal
};

TangentVector apply_jacobi(const ManifoldPoint& p, const TangentVector& w,
                           const TangentVector& u, const JacobiFactors& f) {
    const double theta = norm(w);
    const ManifoldPoint endpoint = exp_map(p, w);
    const TangentVector pulled = parallel_transport(endpoint, p, u);
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean:
            return pulled;
        case ManifoldTag::Sphere2: {
            const Vec e = w.components / theta;
            const double a = pulled.components.dot(e);
            const Vec r = pulled.components - a * e;
            return TangentVector{p, f.along * a * e + f.normal * r};
        }
        case ManifoldTag::Hyperbolic2: {
            const Vec e = w.components / theta;
            const double a = minkowski(pulled.components, e);
            const Vec r = pulled.components - a * e;
            return TangentVector{p, f.along * a * e + f.normal * r};
        }
        case ManifoldTag::KendallShape: {
            const Vec e = w.components / theta;
            const std::complex<double> c = hermitian_inner(e, pulled.components);
            const Vec ie = times_i(e);
            const Vec r = pulled.components - c.real() * e - c.imag() * ie;
            return TangentVector{p, f.along * c.real() * e + f.rotational * c.imag() * ie +
                                        f.normal * r};
        }
    }
    throw ValidationError("unreachable");
}

double sinc(double x) { return x < 1e-8 ? 1.0 : std::sin(x) / x; }
double sinhc(double x) { return x < 1e-8 ? 1.0 : std::sinh(x) / x; }

}  // namespace

TangentVector adjoint_dexp_velocity(const ManifoldPoint& p, const TangentVector& w,
                                    const TangentVector& u_at_endpoint) {
    const double theta = norm(w);
    if (theta < kNearZero) return project_to_tangent(p, u_at_endpoint.components);
    JacobiFactors f{1.0, 1.0, 1.0};
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean: break;
        case ManifoldTag::Sphere2: f.normal = sinc(theta); break;
        case ManifoldTag::Hyperbolic2: f.normal = sinhc(theta); break;
        case ManifoldTag::KendallShape:
            // Holomorphic sectional curvature 4 along i*e, curvature 1 elsewhere.
            f.rotational = sinc(2.0 * theta);
            f.normal = sinc(theta);
            break;
    }
    return apply_jacobi(p, w, u_at_endpoint, f);
}

TangentVector adjoint_dexp_base(const ManifoldPoint& p, const TangentVector& w,
                                const TangentVector& u_at_endpoint) {
    const double theta = norm(w);
    if (theta < kNearZero) return project_to_tangent(p, u_at_endpoint.components);
    JacobiFactors f{1.0, 1.0, 1.0};
    switch (p.kind.tag()) {
        case ManifoldTag::Euclidean: break;
        case ManifoldTag::Sphere2: f.normal = std::cos(theta); break;
        case ManifoldTag::Hyperbolic2: f.normal = std::cosh(theta); break;
        case ManifoldTag::KendallShape:
            f.rotational = std::cos(2.0 * theta);
            f.normal = std::cos(theta);
            break;
    }
    return apply_jacobi(p, w, u_at_endpoint, f);
}

}  // namespace mcausal
