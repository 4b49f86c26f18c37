#include "ssn/oracle.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace ssn::oracle {

namespace {

void validate_fd_step(double h) {
    if (!(h > 0.0) || h > 1e-4) {
        throw ContractError("finite-difference step must satisfy 0 < h <= 1e-4");
    }
}

} // namespace

TangentVector fd_directional_derivative(const VectorField& x, const ManifoldPoint& p,
                                        const TangentVector& v, double h) {
    validate_fd_step(h);
    if (!(v.base() == p)) {
        throw ContractError("fd_directional_derivative: direction based elsewhere");
    }
    if (v.norm() == 0.0) {
        return TangentVector(p, Vector::Zero(p.coords().size()));
    }
    const ManifoldPoint fwd = exp_map(p, h * v);
    const ManifoldPoint bwd = exp_map(p, -h * v);
    const TangentVector xf = parallel_transport(fwd, p, x.eval(fwd));
    const TangentVector xb = parallel_transport(bwd, p, x.eval(bwd));
    return (1.0 / (2.0 * h)) * (xf - xb);
}

TangentMap fd_covariant_derivative(const VectorField& x, const ManifoldPoint& p, double h) {
    validate_fd_step(h);
    const TangentBasis basis = tangent_basis(p);
    const int n = p.kind().dimension();
    Matrix m(n, n);
    for (int j = 0; j < n; ++j) {
        m.col(j) = basis.coords_of(fd_directional_derivative(x, p, basis.column(j), h));
    }
    return TangentMap(p, std::move(m));
}

TangentVector ode_parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                     const TangentVector& v, int steps) {
    if (!(v.base() == p)) {
        throw ContractError("ode_parallel_transport: vector based elsewhere");
    }
    if (steps < 1) {
        throw ContractError("ode_parallel_transport: steps must be >= 1");
    }
    if (p.kind().family() == ManifoldFamily::Euclidean) {
        return TangentVector(q, v.comps());
    }
    if (p == q) {
        return TangentVector(q, v.comps());
    }
    const TangentVector u = log_map(p, q); // rejects near-antipodal pairs
    const double theta = u.norm();
    if (theta <= 1e-15) {
        return TangentVector(q, v.comps());
    }
    const Vector dir = u.comps() / theta;
    const Vector p0 = p.coords();

    const auto gamma = [&](double t) -> Vector {
        return std::cos(t * theta) * p0 + std::sin(t * theta) * dir;
    };
    const auto gamma_dot = [&](double t) -> Vector {
        return theta * (-std::sin(t * theta) * p0 + std::cos(t * theta) * dir);
    };
    // Along a curve on the sphere, a vanishing covariant derivative means the
    // ambient derivative is purely normal: y' = -<y, gamma'> gamma.
    const auto rhs = [&](double t, const Vector& y) -> Vector {
        return -y.dot(gamma_dot(t)) * gamma(t);
    };

    Vector y = v.comps();
    const double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = k * dt;
        const Vector k1 = rhs(t, y);
        const Vector k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
        const Vector k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
        const Vector k4 = rhs(t + dt, y + dt * k3);
        y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const Vector g = gamma((k + 1) * dt);
        y -= y.dot(g) * g;
    }
    return TangentVector(q, y);
}

FlatTrace flat_semismooth_newton(const AmbientMap& y, const Vector& x0,
                                 const SolverConfig& cfg) {
    if (cfg.max_iters < 1 || !(cfg.tol_field > 0.0) || !(cfg.tol_step > 0.0) ||
        !(cfg.singular_threshold > 0.0)) {
        throw ContractError("flat_semismooth_newton: invalid solver configuration");
    }
    FlatTrace trace;
    Vector x = x0;
    trace.iterates.push_back(x);
    trace.field_norms.push_back(y.eval(x).norm());

    for (int k = 0; k < cfg.max_iters; ++k) {
        if (trace.field_norms.back() <= cfg.tol_field) {
            trace.termination = TerminationReason::FieldTolerance;
            return trace;
        }
        const Matrix v = y.clarke_element(x, cfg.selection);
        Eigen::JacobiSVD<Matrix> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
        if (svd.singularValues()(svd.singularValues().size() - 1) < cfg.singular_threshold) {
            trace.termination = TerminationReason::SingularElement;
            return trace;
        }
        const Vector step = svd.solve(Vector(-y.eval(x)));
        x += step;
        trace.step_norms.push_back(step.norm());
        trace.iterates.push_back(x);
        trace.field_norms.push_back(y.eval(x).norm());
        if (step.norm() <= cfg.tol_step) {
            trace.termination = trace.field_norms.back() <= cfg.tol_field
                                    ? TerminationReason::FieldTolerance
                                    : TerminationReason::StepTolerance;
            return trace;
        }
    }
    trace.termination = trace.field_norms.back() <= cfg.tol_field
                            ? TerminationReason::FieldTolerance
                            : TerminationReason::MaxIters;
    return trace;
}

} // namespace ssn::oracle
