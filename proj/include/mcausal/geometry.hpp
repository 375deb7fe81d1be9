#pragma once

#include <optional>
#include <string>

#include "mcausal/errors.hpp"
#include "mcausal/linalg.hpp"

namespace mcausal {

// Supported metric spaces. Sphere2 and Hyperbolic2 are the unit sphere in R^3
// and the hyperboloid sheet {-x^2+y^2+z^2=-1, x>0} in Minkowski R^{1,2};
// KendallShape is the planar shape space of K landmarks, represented through
// centered unit-norm complex preshapes.
enum class ManifoldTag { Euclidean, Sphere2, Hyperbolic2, KendallShape };

class ManifoldKind {
public:
    // Default-constructed kinds (Euclidean(1)) exist so points can live in
    // aggregates before assignment; validation rejects unset coordinates.
    ManifoldKind() : tag_(ManifoldTag::Euclidean), param_(1) {}

    static ManifoldKind euclidean(int dim);
    static ManifoldKind sphere2() { return ManifoldKind(ManifoldTag::Sphere2, 2); }
    static ManifoldKind hyperbolic2() { return ManifoldKind(ManifoldTag::Hyperbolic2, 2); }
    static ManifoldKind kendall_shape(int landmarks);

    ManifoldTag tag() const { return tag_; }
    // Number of coordinates in the ambient representation.
    int ambient_dim() const;
    // K, for KendallShape only.
    int landmarks() const;
    // n, for Euclidean only.
    int euclidean_dim() const;

    std::string name() const;

    friend bool operator==(const ManifoldKind& a, const ManifoldKind& b) {
        return a.tag_ == b.tag_ && a.param_ == b.param_;
    }
    friend bool operator!=(const ManifoldKind& a, const ManifoldKind& b) { return !(a == b); }

private:
    ManifoldKind(ManifoldTag tag, int param) : tag_(tag), param_(param) {}
    ManifoldTag tag_;
    int param_;  // Euclidean dim or landmark count; 2 for the surfaces
};

struct ManifoldPoint {
    ManifoldKind kind;
    Vec coords;  // ambient representation, layout per ManifoldTag
};

// Tangent vector in ambient coordinates, anchored at its base point. For
// KendallShape the components form a horizontal vector: complex-orthogonal to
// the base and with zero landmark sum.
struct TangentVector {
    ManifoldPoint base;
    Vec components;

    const ManifoldKind& kind() const { return base.kind; }
};

// Invariant checks; throw ValidationError with the violated constraint.
void validate_point(const ManifoldPoint& p);
void validate_tangent(const TangentVector& v);

// Riemannian inner product of two tangent vectors at the same base point.
double inner(const TangentVector& a, const TangentVector& b);
double norm(const TangentVector& v);

TangentVector make_tangent(const ManifoldPoint& base, Vec components);
// Orthogonal projection of an ambient vector onto the tangent space at base
// (horizontal space for KendallShape).
TangentVector project_to_tangent(const ManifoldPoint& base, const Vec& ambient);
TangentVector zero_tangent(const ManifoldPoint& base);

// Geodesic distance. Symmetric, nonnegative; [0,pi] on the sphere and
// [0,pi/2] on shape space (after optimal rotation alignment).
double distance(const ManifoldPoint& p, const ManifoldPoint& q);

// Endpoint of the geodesic leaving p with initial velocity v, evaluated at
// time 1. The result satisfies its manifold invariants exactly (renormalized).
ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v);

// Inverse of exp_map. Throws CutLocusError for antipodal sphere points and
// for shapes at distance pi/2.
TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q);

// Parallel transport of v along the minimal geodesic from p to q. Isometric:
// norms and pairwise inner products are preserved.
TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v);

// Centered, unit-norm complex representative of a K x 2 landmark matrix.
// Invariant under translation and positive scaling of the input.
ManifoldPoint kendall_preshape(const Eigen::Matrix<double, Eigen::Dynamic, 2>& landmarks);

// Pullbacks of a cotangent vector u at exp_p(w) through the differential of
// the exponential map, expressed in T_pM. `adjoint_dexp_velocity` is the
// adjoint of v -> exp_p(v) at v = w; `adjoint_dexp_base` is the adjoint of
// p -> exp_p(w) where w is parallel-coupled to the base point (w transported
// when p moves). Both are exact for the supported spaces (Jacobi-field
// eigenstructure of constant-curvature spaces and of planar shape space).
TangentVector adjoint_dexp_velocity(const ManifoldPoint& p, const TangentVector& w,
                                    const TangentVector& u_at_endpoint);
TangentVector adjoint_dexp_base(const ManifoldPoint& p, const TangentVector& w,
                                const TangentVector& u_at_endpoint);

}  // namespace mcausal
