#include "ssn/solver.hpp"

#include <Eigen/SVD>
#include <sstream>

namespace ssn {

namespace {

void validate_config(const SolverConfig& cfg) {
    if (cfg.max_iters < 1) {
        throw ContractError("SolverConfig: max_iters must be >= 1");
    }
    if (!(cfg.tol_field > 0.0) || !(cfg.tol_step > 0.0) || !(cfg.singular_threshold > 0.0)) {
        throw ContractError("SolverConfig: tolerances must be positive");
    }
}

struct TangentSolve {
    TangentMap element;
    double smallest_sv;
    Vector step_coords; // valid only when smallest_sv passed the threshold
};

TangentSolve newton_direction(const VectorField& x, const ManifoldPoint& p,
                              const SelectionRule& rule, double threshold) {
    TangentMap element = x.clarke_element(p, rule);
    Eigen::JacobiSVD<Matrix> svd(element.matrix(),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smin < threshold) {
        return {std::move(element), smin, Vector()};
    }
    const TangentBasis basis = tangent_basis(p);
    const Vector rhs = -basis.coords_of(x.eval(p));
    return {std::move(element), smin, svd.solve(rhs)};
}

} // namespace

const char* to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::FieldTolerance: return "FieldTolerance";
        case TerminationReason::SingularElement: return "SingularElement";
        case TerminationReason::StepTolerance: return "StepTolerance";
        case TerminationReason::MaxIters: return "MaxIters";
    }
    return "Unknown";
}

NewtonTrace newton_solve(const VectorField& x, const ManifoldPoint& p0,
                         const SolverConfig& cfg) {
    validate_config(cfg);
    if (!(p0.kind() == x.manifold())) {
        throw ContractError("newton_solve: start point is not on the field's manifold");
    }

    NewtonTrace trace;
    ManifoldPoint p = p0;
    trace.iterates.push_back(p);
    trace.field_norms.push_back(x.eval(p).norm());

    for (int k = 0; k < cfg.max_iters; ++k) {
        if (trace.field_norms.back() <= cfg.tol_field) {
            trace.termination = TerminationReason::FieldTolerance;
            return trace;
        }
        TangentSolve dir = newton_direction(x, p, cfg.selection, cfg.singular_threshold);
        if (dir.step_coords.size() == 0) {
            trace.termination = TerminationReason::SingularElement;
            return trace;
        }
        const TangentBasis basis = tangent_basis(p);
        const double step_norm = dir.step_coords.norm();
        p = exp_map(p, basis.from_coords(dir.step_coords));
        trace.clarke_elements.push_back(std::move(dir.element));
        trace.step_norms.push_back(step_norm);
        trace.iterates.push_back(p);
        trace.field_norms.push_back(x.eval(p).norm());
        if (step_norm <= cfg.tol_step) {
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

StepResult solve_step(const VectorField& x, const ManifoldPoint& p,
                      const SelectionRule& rule, double singular_threshold) {
    if (!(p.kind() == x.manifold())) {
        throw ContractError("solve_step: point is not on the field's manifold");
    }
    TangentSolve dir = newton_direction(x, p, rule, singular_threshold);
    if (dir.step_coords.size() == 0) {
        std::ostringstream msg;
        msg << "solve_step: derivative element is singular (smallest singular value "
            << dir.smallest_sv << " < " << singular_threshold << ")";
        throw SingularOperatorError(msg.str(), dir.smallest_sv);
    }
    const TangentBasis basis = tangent_basis(p);
    const double step_norm = dir.step_coords.norm();
    ManifoldPoint next = exp_map(p, basis.from_coords(dir.step_coords));
    return {std::move(next), std::move(dir.element), step_norm};
}

} // namespace ssn
