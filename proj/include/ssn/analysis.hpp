#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssn/fields.hpp"
#include "ssn/solver.hpp"
#include "ssn/tangent_map.hpp"

// Estimators that make the convergence theory's hypotheses empirically
// checkable. Every supremum over an infinite set is approximated from below
// by seeded random sampling plus structured samples (basis-axis directions,
// collinear rays, derivative-informed probes); outputs are lower bounds of
// the true constants unless stated otherwise.

namespace ssn {

/// Sampled slope bound: max over geodesic pairs (p, q) in the ball of
/// ||P X(p) - X(q)|| / d(p, q). Structured samples include pairs along the
/// tangent basis axes and short probes aligned with the top singular direction
/// of a midpoint derivative element. A lower bound on the Lipschitz constant.
double estimate_lipschitz(const VectorField& x, const ManifoldPoint& center,
                          double radius, int samples, std::uint64_t seed);

/// sqrt(1 + L^2): the constant turning a transport-based Lipschitz bound into
/// one for the tangent-bundle metric.
double lipschitz_to_metric(double lipschitz);

/// Single-geodesic bound on the tangent-bundle distance between u and v:
/// sqrt(d(p,q)^2 + ||P u - v||^2) with p, q the base points.
double tm_distance_upper_bound(const TangentVector& u, const TangentVector& v);

/// Sampled geodesic-spread constant around p: max of
/// d(exp_q u, exp_q v)/||u - v|| over sampled q in the injectivity ball and
/// tangent pairs u, v at q. Collinear pairs (ratio exactly one) are always
/// among the structured samples, so the estimate is a lower bound that is
/// never below one up to rounding. Sphere sampling truncates the radius to
/// pi - 1e-3; flat space uses radius one (the ratio is scale-free there).
double estimate_kp(const ManifoldKind& kind, const ManifoldPoint& p, int samples,
                   std::uint64_t seed);

/// Residuals of the linearization X(p) + V_p log_p(p*) transported to p*,
/// maximized over samples at each radius, with a log-log power fit
/// residual ~ eps * r^(1+mu).
struct SemismoothScan {
    ManifoldPoint center;
    std::vector<double> radii;     // strictly decreasing
    std::vector<double> residuals; // max over samples at each radius
    double fitted_mu = 0.0;        // clamped to [0, 1.5]
    double fitted_eps = 0.0;
    /// Some residual was exactly zero (exactly linear field); no finite slope.
    bool exceeds_scan_precision = false;
    /// The raw fitted exponent was above one, the cap for the order property.
    bool mu_exceeds_semismooth_cap = false;
};

SemismoothScan semismooth_scan(const VectorField& x, const ManifoldPoint& p_star,
                               std::vector<double> radii, int samples_per_radius,
                               const SelectionRule& rule, std::uint64_t seed);

/// Inverse-norm bound ||A^{-1}|| / (1 - ||A^{-1}(B - A)||), applicable when
/// ||A^{-1}|| ||B - A|| < 1; nullopt otherwise. Operator norms are largest
/// singular values. Throws on singular A.
std::optional<double> banach_inverse_bound(const TangentMap& a, const TangentMap& b);

/// Max sampled inverse norm ||V^{-1}|| over rule-selected derivative elements
/// at p (all deterministic rules plus seeded random vertices). Throws
/// SingularOperatorError when a sampled element is numerically singular.
double max_inverse_norm(const VectorField& x, const ManifoldPoint& p,
                        std::uint64_t seed);

/// Largest listed radius r such that every sampled element at sampled points
/// of the ball B_r(p*) is nonsingular with ||V^{-1}|| <= lambda/(1 - eps*lambda),
/// where lambda = max_inverse_norm at p*. Returns 0 when no radius passes.
double regularity_radius_probe(const VectorField& x, const ManifoldPoint& p_star,
                               double eps, std::vector<double> radii, int samples,
                               std::uint64_t seed);

/// Verdicts of the two semi-local convergence inequalities for a start point,
/// plus the a-posteriori error coefficient eps*lambda/(1 - 2 eps*lambda)
/// multiplying the last step length. When the first inequality fails the
/// dependent fields are not applicable.
struct KantorovichCertificate {
    ManifoldPoint p0;
    double lambda0 = 0.0;
    double eps = 0.0;
    double delta_bar = 0.0;
    double field_norm_p0 = 0.0;
    bool cond1 = false;                          // eps*lambda0 < 1/2
    std::optional<bool> cond2;                   // lambda0*||X(p0)||/(1-2 eps l) <= delta_bar
    std::optional<double> predicted_error_coeff; // eps*lambda0/(1-2 eps*lambda0)
};

KantorovichCertificate kantorovich_check(const VectorField& x, const ManifoldPoint& p0,
                                         double delta_bar, double eps, double lambda0);

/// Measured inputs for a certificate: a max-precision presolve fixes the
/// solution, lambda0 is sampled at p0, and eps is the largest linearization
/// residual per unit distance seen in the solution-centered scan and along
/// consecutive presolve iterates. eps_reverse measures the opposite direction
/// (linearizing at the solution), which drives the uniqueness argument.
struct KantorovichInputs {
    double lambda0 = 0.0;
    double eps = 0.0;
    double eps_reverse = 0.0;
    ManifoldPoint solution;
    NewtonTrace presolve;
    /// 1.2 x the ball-radius bound when the first inequality is feasible, 0 otherwise.
    double suggested_delta_bar = 0.0;
};

KantorovichInputs measure_kantorovich_inputs(const VectorField& x, const ManifoldPoint& p0,
                                             const SelectionRule& rule, std::uint64_t seed);

/// Successive convergence-order quotients along a trace:
/// q_k = log(d_{k+1}/d_k) / log(d_k/d_{k-1}) with d_k the distance to p*.
/// Quotients are kept only while d_{k+1} >= 1e-13 and d_k/d_{k-1} <= 1/2.
struct OrderEstimate {
    std::vector<double> orders;
    double final_order = 0.0; // median of the last (up to) three quotients
    /// Distance ratios d_{k+1}/d_k strictly decrease toward zero.
    bool superlinear = false;
};

OrderEstimate estimate_order(const NewtonTrace& trace, const ManifoldPoint& p_star);

} // namespace ssn
