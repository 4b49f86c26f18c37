#include "ssn/tangent_map.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace ssn {

TangentMap::TangentMap(ManifoldPoint base, Matrix matrix)
    : base_(std::move(base)), matrix_(std::move(matrix)) {
    const int n = base_.kind().dimension();
    if (matrix_.rows() != n || matrix_.cols() != n) {
        std::ostringstream msg;
        msg << "TangentMap: expected a " << n << "x" << n << " matrix, got "
            << matrix_.rows() << "x" << matrix_.cols();
        throw ContractError(msg.str());
    }
}

TangentVector apply(const TangentMap& m, const TangentVector& v) {
    if (!(v.base() == m.base())) {
        throw ContractError("TangentMap::apply: vector is based at a different point");
    }
    const TangentBasis basis = tangent_basis(m.base());
    return basis.from_coords(m.matrix() * basis.coords_of(v));
}

TangentVector solve(const TangentMap& m, const TangentVector& rhs,
                    double singular_threshold) {
    if (!(rhs.base() == m.base())) {
        throw ContractError("TangentMap::solve: vector is based at a different point");
    }
    Eigen::JacobiSVD<Matrix> svd(m.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < singular_threshold) {
        std::ostringstream msg;
        msg << "TangentMap::solve: smallest singular value " << smin
            << " is below the threshold " << singular_threshold;
        throw SingularOperatorError(msg.str(), smin);
    }
    const TangentBasis basis = tangent_basis(m.base());
    return basis.from_coords(svd.solve(basis.coords_of(rhs)));
}

double operator_norm(const TangentMap& m) {
    Eigen::JacobiSVD<Matrix> svd(m.matrix());
    return svd.singularValues()(0);
}

double smallest_singular_value(const TangentMap& m) {
    Eigen::JacobiSVD<Matrix> svd(m.matrix());
    return svd.singularValues()(svd.singularValues().size() - 1);
}

TangentMap transport_operator(const TangentMap& m, const ManifoldPoint& to) {
    if (m.base() == to) {
        return m;
    }
    const TangentBasis from_basis = tangent_basis(m.base());
    const TangentBasis to_basis = tangent_basis(to);
    const int n = m.base().kind().dimension();
    // Columns: coordinates at `to` of the transported basis vectors of `base`.
    Matrix c(n, n);
    for (int j = 0; j < n; ++j) {
        c.col(j) = to_basis.coords_of(
            parallel_transport(m.base(), to, from_basis.column(j)));
    }
    return TangentMap(to, c * m.matrix() * c.transpose());
}

} // namespace ssn
