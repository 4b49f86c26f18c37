#include "ssn/geometry.hpp"

#include <cmath>
#include <sstream>

#include "ssn/sphere.hpp"

namespace ssn {

namespace {

// Constructor repair thresholds: defects up to the repair tolerance are
// corrected silently, anything larger is a genuine bug in the caller.
constexpr double kRepairTol = 1e-9;
constexpr double kZeroVelocity = 1e-15;
constexpr double kBasisSignTol = 1e-12;

void require_same_kind(const ManifoldPoint& p, const ManifoldPoint& q, const char* op) {
    if (!(p.kind() == q.kind())) {
        std::ostringstream msg;
        msg << op << ": points live on different manifolds";
        throw ContractError(msg.str());
    }
}

void require_base(const TangentVector& v, const ManifoldPoint& p, const char* op) {
    if (!(v.base() == p)) {
        std::ostringstream msg;
        msg << op << ": tangent vector is based at a different point";
        throw ContractError(msg.str());
    }
}

void check_antipodal(double theta, double margin, const char* op) {
    if (theta > M_PI - margin) {
        std::ostringstream msg;
        msg << op << ": points are within the antipodal margin " << margin
            << " of distance pi; the minimal geodesic is not unique";
        throw GeodesicDomainError(msg.str());
    }
}

} // namespace

ManifoldKind ManifoldKind::sphere(int dimension) {
    if (dimension < 1) {
        throw ContractError("ManifoldKind::sphere: dimension must be >= 1");
    }
    return ManifoldKind(ManifoldFamily::Sphere, dimension);
}

ManifoldKind ManifoldKind::euclidean(int dimension) {
    if (dimension < 1) {
        throw ContractError("ManifoldKind::euclidean: dimension must be >= 1");
    }
    return ManifoldKind(ManifoldFamily::Euclidean, dimension);
}

double ManifoldKind::injectivity_radius() const {
    return family_ == ManifoldFamily::Sphere ? M_PI
                                             : std::numeric_limits<double>::infinity();
}

ManifoldPoint::ManifoldPoint(ManifoldKind kind, Vector coords)
    : kind_(kind), coords_(std::move(coords)) {
    if (coords_.size() != kind_.ambient_dimension()) {
        std::ostringstream msg;
        msg << "ManifoldPoint: expected " << kind_.ambient_dimension()
            << " coordinates, got " << coords_.size();
        throw ContractError(msg.str());
    }
    if (kind_.family() == ManifoldFamily::Sphere) {
        const double norm = coords_.norm();
        if (std::abs(norm - 1.0) > kRepairTol) {
            std::ostringstream msg;
            msg << "ManifoldPoint: coordinates are off the unit sphere by "
                << std::abs(norm - 1.0);
            throw ContractError(msg.str());
        }
        coords_ /= norm;
    }
}

TangentVector::TangentVector(ManifoldPoint base, Vector comps)
    : base_(std::move(base)), comps_(std::move(comps)) {
    if (comps_.size() != base_.coords().size()) {
        throw ContractError("TangentVector: component/point dimension mismatch");
    }
    if (base_.kind().family() == ManifoldFamily::Sphere) {
        const double s = base_.coords().dot(comps_);
        if (std::abs(s) > kRepairTol) {
            std::ostringstream msg;
            msg << "TangentVector: components leave the tangent space by " << std::abs(s);
            throw ContractError(msg.str());
        }
        comps_ -= s * base_.coords();
    }
}

TangentVector operator+(const TangentVector& a, const TangentVector& b) {
    require_base(b, a.base(), "TangentVector::operator+");
    return TangentVector(a.base(), a.comps() + b.comps());
}

TangentVector operator-(const TangentVector& a, const TangentVector& b) {
    require_base(b, a.base(), "TangentVector::operator-");
    return TangentVector(a.base(), a.comps() - b.comps());
}

TangentVector operator*(double s, const TangentVector& v) {
    return TangentVector(v.base(), s * v.comps());
}

Vector TangentBasis::coords_of(const TangentVector& v) const {
    require_base(v, base_, "TangentBasis::coords_of");
    return basis_.transpose() * v.comps();
}

TangentVector TangentBasis::from_coords(const Vector& coords) const {
    if (coords.size() != basis_.cols()) {
        throw ContractError("TangentBasis::from_coords: wrong coordinate count");
    }
    return TangentVector(base_, basis_ * coords);
}

ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) {
    require_base(v, p, "exp_map");
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return ManifoldPoint(p.kind(), p.coords() + v.comps());
    }
    if (v.norm() <= kZeroVelocity) {
        return p;
    }
    return ManifoldPoint(p.kind(), sphere::exp_map(p.coords(), v.comps()));
}

TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q,
                      double antipodal_margin) {
    require_same_kind(p, q, "log_map");
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return TangentVector(p, q.coords() - p.coords());
    }
    if (p == q) {
        return TangentVector(p, Vector::Zero(p.coords().size()));
    }
    const double theta = sphere::distance(p.coords(), q.coords());
    check_antipodal(theta, antipodal_margin, "log_map");
    return TangentVector(p, sphere::log_map(p.coords(), q.coords()));
}

double distance(const ManifoldPoint& p, const ManifoldPoint& q) {
    require_same_kind(p, q, "distance");
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return (p.coords() - q.coords()).norm();
    }
    return sphere::distance(p.coords(), q.coords());
}

TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                 const TangentVector& v, double antipodal_margin) {
    require_base(v, p, "parallel_transport");
    require_same_kind(p, q, "parallel_transport");
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return TangentVector(q, v.comps());
    }
    if (p == q) {
        return TangentVector(q, v.comps());
    }
    const double theta = sphere::distance(p.coords(), q.coords());
    check_antipodal(theta, antipodal_margin, "parallel_transport");
    if (theta <= kZeroVelocity) {
        return TangentVector(q, v.comps());
    }
    return TangentVector(q, sphere::transport(p.coords(), q.coords(), v.comps()));
}

TangentBasis tangent_basis(const ManifoldPoint& p) {
    const int n = p.kind().dimension();
    const int ambient = p.kind().ambient_dimension();
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return TangentBasis(p, Matrix::Identity(ambient, ambient));
    }

    // Drop the standard basis vector most aligned with p (smallest index on
    // ties), then modified Gram-Schmidt, run twice for orthogonality at
    // machine precision.
    int drop = 0;
    for (int i = 1; i < ambient; ++i) {
        if (std::abs(p.coords()(i)) > std::abs(p.coords()(drop))) {
            drop = i;
        }
    }
    Matrix basis(ambient, n);
    int col = 0;
    for (int i = 0; i < ambient; ++i) {
        if (i == drop) continue;
        basis.col(col++) = Vector::Unit(ambient, i);
    }
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < n; ++j) {
            basis.col(j) -= p.coords().dot(basis.col(j)) * p.coords();
            for (int k = 0; k < j; ++k) {
                basis.col(j) -= basis.col(k).dot(basis.col(j)) * basis.col(k);
            }
            basis.col(j) /= basis.col(j).norm();
        }
    }
    // Sign rule: first component with magnitude above the tolerance is positive.
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < ambient; ++i) {
            if (std::abs(basis(i, j)) > kBasisSignTol) {
                if (basis(i, j) < 0.0) {
                    basis.col(j) = -basis.col(j);
                }
                break;
            }
        }
    }
    return TangentBasis(p, std::move(basis));
}

} // namespace ssn
