#pragma once

#include <vector>

#include "ssn/fields.hpp"
#include "ssn/solver.hpp"

// Reference computations kept independent of the closed-form paths they
// validate. Allowed to be slow.

namespace ssn::oracle {

/// Central-difference directional derivative through transported field values:
/// (1/2h) [ P X(exp_p(hv)) - P X(exp_p(-hv)) ], both transported back to p.
/// Caller asserts p is a differentiability point; requires 0 < h <= 1e-4.
TangentVector fd_directional_derivative(const VectorField& x, const ManifoldPoint& p,
                                        const TangentVector& v, double h = 1e-5);

/// Columns are fd_directional_derivative on the tangent basis vectors,
/// assembled in tangent-basis coordinates.
TangentMap fd_covariant_derivative(const VectorField& x, const ManifoldPoint& p,
                                   double h = 1e-5);

/// Transports v from p to q by integrating the vanishing-covariant-derivative
/// condition along the minimal geodesic with classical RK4, re-projecting onto
/// the tangent space after each step to suppress drift.
TangentVector ode_parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                     const TangentVector& v, int steps = 1000);

/// Iterate history of the classical flat-space semismooth Newton recursion.
struct FlatTrace {
    std::vector<Vector> iterates;
    std::vector<double> field_norms;
    std::vector<double> step_norms;
    TerminationReason termination = TerminationReason::MaxIters;
};

/// x_{k+1} = x_k - V_k^{-1} Y(x_k) in plain ambient coordinates, with the
/// same stopping rules and ordering as newton_solve. Reduction oracle for the
/// flat-manifold solver.
FlatTrace flat_semismooth_newton(const AmbientMap& y, const Vector& x0,
                                 const SolverConfig& cfg);

} // namespace ssn::oracle
