#pragma once

#include <Eigen/Dense>
#include <limits>

#include "ssn/errors.hpp"

namespace ssn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ManifoldFamily { Sphere, Euclidean };

/// Manifold tag: the unit sphere S^n embedded in R^{n+1}, or flat R^n.
class ManifoldKind {
public:
    static ManifoldKind sphere(int dimension);
    static ManifoldKind euclidean(int dimension);

    [[nodiscard]] ManifoldFamily family() const { return family_; }
    /// Intrinsic dimension n (tangent spaces are n-dimensional).
    [[nodiscard]] int dimension() const { return dim_; }
    /// Length of the coordinate arrays: n+1 on the sphere, n in flat space.
    [[nodiscard]] int ambient_dimension() const {
        return family_ == ManifoldFamily::Sphere ? dim_ + 1 : dim_;
    }
    /// pi on the sphere; +infinity is the sentinel for unbounded flat space.
    [[nodiscard]] double injectivity_radius() const;

    friend bool operator==(const ManifoldKind&, const ManifoldKind&) = default;

private:
    ManifoldKind(ManifoldFamily family, int dim) : family_(family), dim_(dim) {}
    ManifoldFamily family_;
    int dim_;
};

/// A point on the manifold, stored in ambient coordinates. Sphere points are
/// renormalized on construction when the norm defect is at most 1e-9 and
/// rejected beyond that.
class ManifoldPoint {
public:
    ManifoldPoint(ManifoldKind kind, Vector coords);

    [[nodiscard]] const ManifoldKind& kind() const { return kind_; }
    [[nodiscard]] const Vector& coords() const { return coords_; }

    /// Exact coordinate equality; the constructors are deterministic, so
    /// values produced by the same inputs compare equal bit for bit.
    friend bool operator==(const ManifoldPoint& a, const ManifoldPoint& b) {
        return a.kind_ == b.kind_ && a.coords_.size() == b.coords_.size() &&
               (a.coords_.array() == b.coords_.array()).all();
    }

private:
    ManifoldKind kind_;
    Vector coords_;
};

/// Base point plus ambient components constrained to the tangent space.
/// Sphere components are re-projected when |<p, v>| <= 1e-9, rejected beyond.
class TangentVector {
public:
    TangentVector(ManifoldPoint base, Vector comps);

    [[nodiscard]] const ManifoldPoint& base() const { return base_; }
    [[nodiscard]] const Vector& comps() const { return comps_; }
    [[nodiscard]] double norm() const { return comps_.norm(); }

private:
    ManifoldPoint base_;
    Vector comps_;
};

TangentVector operator+(const TangentVector& a, const TangentVector& b);
TangentVector operator-(const TangentVector& a, const TangentVector& b);
TangentVector operator*(double s, const TangentVector& v);

/// Deterministic orthonormal basis of one tangent space. Columns of matrix()
/// are the ambient coordinates of the basis vectors.
class TangentBasis {
public:
    [[nodiscard]] const ManifoldPoint& base() const { return base_; }
    [[nodiscard]] const Matrix& matrix() const { return basis_; }
    [[nodiscard]] TangentVector column(int i) const {
        return TangentVector(base_, basis_.col(i));
    }
    /// Coordinates of a tangent vector at the same base in this basis.
    [[nodiscard]] Vector coords_of(const TangentVector& v) const;
    /// Tangent vector with the given basis coordinates.
    [[nodiscard]] TangentVector from_coords(const Vector& coords) const;

private:
    friend TangentBasis tangent_basis(const ManifoldPoint& p);
    TangentBasis(ManifoldPoint base, Matrix basis)
        : base_(std::move(base)), basis_(std::move(basis)) {}
    ManifoldPoint base_;
    Matrix basis_;
};

/// Pairs within this distance of antipodal are rejected: the minimal geodesic
/// is no longer unique there.
inline constexpr double kDefaultAntipodalMargin = 1e-6;

/// Point reached from p after unit time along the geodesic with velocity v.
ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v);

/// Initial velocity of the minimal geodesic from p to q; its norm equals the
/// geodesic distance. Rejects sphere pairs within `antipodal_margin` of pi.
TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q,
                      double antipodal_margin = kDefaultAntipodalMargin);

/// Geodesic distance. Sphere: arccos of the clamped inner product.
double distance(const ManifoldPoint& p, const ManifoldPoint& q);

/// Parallel transport of v along the minimal geodesic from p to q. An
/// isometry; identity in flat space.
TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v,
                                 double antipodal_margin = kDefaultAntipodalMargin);

/// Deterministic orthonormal tangent basis. Sphere: Gram-Schmidt of the n
/// standard basis vectors least aligned with p, in index order, each sign-fixed
/// so its first component above 1e-12 in magnitude is positive. Flat space:
/// the standard basis.
TangentBasis tangent_basis(const ManifoldPoint& p);

} // namespace ssn
