#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

// Closed-form geometry of the unit sphere S^n embedded in R^{n+1}, written as
// free functions over Eigen expressions and generic in the scalar type. Inputs
// are ambient coordinates; callers own validation (unit norm, tangency,
// antipodal margins). The domain layer in geometry.hpp wraps these with
// checked strong types.

namespace ssn::sphere {

/// sin(theta)/theta, series below the cutoff where the quotient loses digits.
template <typename Scalar>
Scalar sinc(Scalar theta) {
    const Scalar t2 = theta * theta;
    if (theta < Scalar(1e-4)) {
        return Scalar(1) - t2 / Scalar(6) + t2 * t2 / Scalar(120);
    }
    return std::sin(theta) / theta;
}

/// (1 - cos(theta))/theta^2, series below the cutoff.
template <typename Scalar>
Scalar one_minus_cos_over_sq(Scalar theta) {
    const Scalar t2 = theta * theta;
    if (theta < Scalar(1e-4)) {
        return Scalar(0.5) - t2 / Scalar(24) + t2 * t2 / Scalar(720);
    }
    return (Scalar(1) - std::cos(theta)) / t2;
}

/// Geodesic from p with initial velocity v, evaluated at unit time:
/// cos(|v|) p + sin(|v|) v/|v|. For |v| <= 1e-15 returns p.
template <typename DerivedP, typename DerivedV>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1>
exp_map(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedV>& v) {
    using Scalar = typename DerivedP::Scalar;
    const Scalar theta = v.norm();
    if (theta <= Scalar(1e-15)) {
        return p;
    }
    return std::cos(theta) * p + sinc(theta) * v;
}

/// Geodesic angle between unit vectors p and q. Evaluated through the chord
/// length, which agrees with arccos of the clamped dot to rounding but keeps
/// full precision at small angles, where arccos quantizes to ~1e-8 steps.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar distance(const Eigen::MatrixBase<DerivedP>& p,
                                   const Eigen::MatrixBase<DerivedQ>& q) {
    using Scalar = typename DerivedP::Scalar;
    if (p.dot(q) >= Scalar(0)) {
        const Scalar half_chord = std::min((p - q).norm() / Scalar(2), Scalar(1));
        return Scalar(2) * std::asin(half_chord);
    }
    const Scalar half_chord = std::min((p + q).norm() / Scalar(2), Scalar(1));
    return Scalar(M_PI) - Scalar(2) * std::asin(half_chord);
}

/// Initial velocity of the minimal geodesic from p to q. The returned vector
/// has norm equal to the geodesic angle; its direction is the normalized
/// tangent projection of q. Callers must reject near-antipodal pairs first.
template <typename DerivedP, typename DerivedQ>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1>
log_map(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q) {
    using Scalar = typename DerivedP::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Scalar dot = std::clamp(p.dot(q), Scalar(-1), Scalar(1));
    const Scalar theta = distance(p, q);
    Vec u = q - dot * p;
    const Scalar un = u.norm();
    if (un <= Scalar(0)) {
        return Vec::Zero(p.size());
    }
    return (theta / un) * u;
}

/// Parallel transport of tangent vector v from p to q along the minimal
/// geodesic: v - <u,v> [ (1-cos)/theta^2 u + sinc(theta) p ] with u = log_p q.
template <typename DerivedP, typename DerivedQ, typename DerivedV>
Eigen::Matrix<typename DerivedP::Scalar, Eigen::Dynamic, 1>
transport(const Eigen::MatrixBase<DerivedP>& p, const Eigen::MatrixBase<DerivedQ>& q,
          const Eigen::MatrixBase<DerivedV>& v) {
    using Scalar = typename DerivedP::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Vec u = log_map(p, q);
    const Scalar theta = u.norm();
    if (theta <= Scalar(1e-15)) {
        return v;
    }
    const Scalar a = u.dot(v);
    return v - a * (one_minus_cos_over_sq(theta) * u + sinc(theta) * p.derived());
}

} // namespace ssn::sphere
