#pragma once

#include <vector>

#include "ssn/fields.hpp"
#include "ssn/geometry.hpp"
#include "ssn/tangent_map.hpp"

namespace ssn {

enum class TerminationReason { FieldTolerance, SingularElement, StepTolerance, MaxIters };

[[nodiscard]] const char* to_string(TerminationReason reason);

struct SolverConfig {
    int max_iters = 50;
    /// Stop when the field norm at the iterate is at most this.
    double tol_field = 1e-12;
    /// Stop after a step of norm at most this.
    double tol_step = 1e-14;
    SelectionRule selection{};
    /// Minimum acceptable smallest singular value of a derivative element.
    double singular_threshold = 1e-10;
};

/// Full iterate history of one Newton run. With K steps taken there are K+1
/// iterates and field norms, and K step norms and derivative elements.
struct NewtonTrace {
    std::vector<ManifoldPoint> iterates;
    std::vector<double> field_norms;
    std::vector<double> step_norms;
    std::vector<TangentMap> clarke_elements;
    TerminationReason termination = TerminationReason::MaxIters;

    [[nodiscard]] const ManifoldPoint& final_point() const { return iterates.back(); }
};

/// Runs the iteration p_{k+1} = exp_{p_k}(-V_k^{-1} X(p_k)) with V_k the
/// rule-selected derivative element, solving the tangent system in
/// tangent-basis coordinates through an SVD. Stopping conditions are checked
/// in the order field tolerance, singular element, step tolerance, iteration
/// cap; a singular element terminates the trace rather than throwing.
NewtonTrace newton_solve(const VectorField& x, const ManifoldPoint& p0,
                         const SolverConfig& cfg);

struct StepResult {
    ManifoldPoint next;
    TangentMap element;
    double step_norm;
};

/// One application of the Newton iteration mapping. Throws
/// SingularOperatorError when the element's smallest singular value is below
/// the threshold.
StepResult solve_step(const VectorField& x, const ManifoldPoint& p,
                      const SelectionRule& rule, double singular_threshold);

} // namespace ssn
