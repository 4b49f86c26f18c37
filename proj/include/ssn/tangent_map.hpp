#pragma once

#include "ssn/geometry.hpp"

namespace ssn {

/// Linear operator on one tangent space, stored as an n x n matrix in
/// tangent_basis(base) coordinates. Applying it to a vector based elsewhere is
/// a contract violation; move operators between tangent spaces with
/// transport_operator.
class TangentMap {
public:
    TangentMap(ManifoldPoint base, Matrix matrix);

    [[nodiscard]] const ManifoldPoint& base() const { return base_; }
    [[nodiscard]] const Matrix& matrix() const { return matrix_; }

private:
    ManifoldPoint base_;
    Matrix matrix_;
};

TangentVector apply(const TangentMap& m, const TangentVector& v);

/// Solves m x = rhs; throws SingularOperatorError when the smallest singular
/// value is below `singular_threshold`.
TangentVector solve(const TangentMap& m, const TangentVector& rhs,
                    double singular_threshold);

/// Largest singular value.
double operator_norm(const TangentMap& m);

double smallest_singular_value(const TangentMap& m);

/// Conjugation by parallel transport: the operator P o m o P^{-1} on the
/// tangent space at `to`, expressed in tangent_basis(to) coordinates.
TangentMap transport_operator(const TangentMap& m, const ManifoldPoint& to);

} // namespace ssn
