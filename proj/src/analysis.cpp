#include "ssn/analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssn/random.hpp"

namespace ssn {

namespace {

// Floor below which a sampled element counts as numerically singular.
constexpr double kSingularProbeTol = 1e-12;
// Validity floor for distances entering order quotients.
constexpr double kOrderFloor = 1e-13;

/// ||X(q) - P_{p->q}[X(p) + V_p log_p(q)]||, the linearization residual of the
/// convergence assumptions.
double linearization_residual(const VectorField& x, const ManifoldPoint& p,
                              const ManifoldPoint& q, const TangentMap& v_p) {
    const TangentVector lin = x.eval(p) + apply(v_p, log_map(p, q));
    const TangentVector transported = parallel_transport(p, q, lin);
    return (x.eval(q) - transported).norm();
}

/// Deterministic rules plus a few seeded random vertices; the sampled stand-in
/// for "every element" at a point.
std::vector<SelectionRule> probe_rules(std::uint64_t seed) {
    std::vector<SelectionRule> rules = {SelectionRule::midpoint(), SelectionRule::lower(),
                                        SelectionRule::upper()};
    for (std::uint64_t i = 0; i < 4; ++i) {
        rules.push_back(SelectionRule::random_vertex(seed + i));
    }
    return rules;
}

double smallest_sv(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

double largest_sv(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

void validate_ball(const ManifoldPoint& center, double radius, const char* op) {
    if (!(radius > 0.0)) {
        std::ostringstream msg;
        msg << op << ": radius must be positive";
        throw ContractError(msg.str());
    }
    if (radius >= center.kind().injectivity_radius()) {
        std::ostringstream msg;
        msg << op << ": radius " << radius << " is not below the injectivity radius";
        throw ContractError(msg.str());
    }
}

double median_of_tail(const std::vector<double>& values, std::size_t count) {
    const std::size_t n = std::min(count, values.size());
    std::vector<double> tail(values.end() - static_cast<std::ptrdiff_t>(n), values.end());
    std::sort(tail.begin(), tail.end());
    return n % 2 == 1 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

} // namespace

double estimate_lipschitz(const VectorField& x, const ManifoldPoint& center,
                          double radius, int samples, std::uint64_t seed) {
    validate_ball(center, radius, "estimate_lipschitz");
    if (samples < 2) {
        throw ContractError("estimate_lipschitz: samples must be >= 2");
    }

    const auto pair_slope = [&](const ManifoldPoint& p, const ManifoldPoint& q) -> double {
        const double d = distance(p, q);
        if (d < 1e-12) {
            return 0.0;
        }
        const TangentVector moved = parallel_transport(p, q, x.eval(p));
        return (moved - x.eval(q)).norm() / d;
    };

    double best = 0.0;
    const TangentBasis basis = tangent_basis(center);
    const double r = 0.99 * radius;

    for (int j = 0; j < center.kind().dimension(); ++j) {
        for (const double sign : {1.0, -1.0}) {
            const TangentVector dir = sign * basis.column(j);
            const ManifoldPoint far = exp_map(center, r * dir);
            const ManifoldPoint mid = exp_map(center, (0.5 * r) * dir);
            best = std::max(best, pair_slope(far, mid));
            best = std::max(best, pair_slope(center, far));
        }
        best = std::max(best, pair_slope(exp_map(center, r * basis.column(j)),
                                         exp_map(center, (-r) * basis.column(j))));
    }

    Rng rng(seed);
    const double probe_h = 1e-4 * radius;
    for (int k = 0; k < samples; ++k) {
        ManifoldPoint p = random_point_in_ball(rng, center, radius);
        ManifoldPoint q = random_point_in_ball(rng, center, radius);
        for (int attempt = 0; attempt < 100 && distance(p, q) < 1e-12; ++attempt) {
            q = random_point_in_ball(rng, center, radius);
        }
        if (distance(p, q) >= 1e-12) {
            best = std::max(best, pair_slope(p, q));
        }
        // Short probe along the steepest direction of a derivative element.
        if (distance(center, p) + probe_h <= radius) {
            const TangentMap v = x.clarke_element(p, SelectionRule::midpoint());
            Eigen::JacobiSVD<Matrix> svd(v.matrix(), Eigen::ComputeFullV);
            const TangentVector steep =
                tangent_basis(p).from_coords(svd.matrixV().col(0));
            best = std::max(best, pair_slope(p, exp_map(p, probe_h * steep)));
        }
    }
    return best;
}

double lipschitz_to_metric(double lipschitz) {
    if (lipschitz < 0.0) {
        throw ContractError("lipschitz_to_metric: constant must be nonnegative");
    }
    return std::hypot(1.0, lipschitz);
}

double tm_distance_upper_bound(const TangentVector& u, const TangentVector& v) {
    const double d = distance(u.base(), v.base());
    const TangentVector moved = parallel_transport(u.base(), v.base(), u);
    return std::hypot(d, (moved - v).norm());
}

double estimate_kp(const ManifoldKind& kind, const ManifoldPoint& p, int samples,
                   std::uint64_t seed) {
    if (!(p.kind() == kind)) {
        throw ContractError("estimate_kp: point is not on the given manifold");
    }
    if (samples < 1) {
        throw ContractError("estimate_kp: samples must be >= 1");
    }
    const bool sphere = kind.family() == ManifoldFamily::Sphere;
    const double r = sphere ? M_PI - 1e-3 : 1.0;

    const auto spread = [&](const ManifoldPoint& q, const TangentVector& u,
                            const TangentVector& v) -> double {
        const double sep = (u - v).norm();
        if (sep < 1e-12) {
            return 0.0;
        }
        return distance(exp_map(q, u), exp_map(q, v)) / sep;
    };

    double best = 0.0;
    // Collinear rays realize the spread ratio one exactly; keep them among the
    // structured samples so the lower bound never drops below it.
    {
        const TangentVector axis = tangent_basis(p).column(0);
        best = std::max(best, spread(p, (0.45 * r) * axis, (-0.3 * r) * axis));
        best = std::max(best, spread(p, (0.6 * r) * axis, (0.1 * r) * axis));
        const ManifoldPoint q = exp_map(p, (0.5 * r) * axis);
        const TangentVector w = tangent_basis(q).column(0);
        best = std::max(best, spread(q, (0.5 * r) * w, (-0.25 * r) * w));
    }

    Rng rng(seed);
    for (int i = 0; i < samples; ++i) {
        const ManifoldPoint q = random_point_in_ball(rng, p, r);
        const TangentVector w = random_unit_tangent(rng, q);
        const double rho = r * rng.uniform();
        const TangentVector v = rho * w;
        TangentVector u = v;
        if (i % 8 == 0) {
            const double s = rng.uniform(0.1, r) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
            u = (rho + s) * w;
        } else {
            const TangentVector w2 = random_unit_tangent(rng, q);
            u = v + rng.uniform(0.05, r) * w2;
        }
        best = std::max(best, spread(q, u, v));
    }
    return best;
}

SemismoothScan semismooth_scan(const VectorField& x, const ManifoldPoint& p_star,
                               std::vector<double> radii, int samples_per_radius,
                               const SelectionRule& rule, std::uint64_t seed) {
    if (x.eval(p_star).norm() > 1e-10) {
        throw ContractError("semismooth_scan: center is not a singularity of the field");
    }
    std::sort(radii.begin(), radii.end(), std::greater<>());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    if (radii.size() < 2) {
        throw ContractError("semismooth_scan: need at least two distinct radii");
    }
    for (const double r : radii) {
        validate_ball(p_star, r, "semismooth_scan");
    }
    if (samples_per_radius < 0) {
        throw ContractError("semismooth_scan: samples_per_radius must be >= 0");
    }

    const TangentBasis basis = tangent_basis(p_star);
    const int n = p_star.kind().dimension();

    SemismoothScan scan{p_star, radii, {}, 0.0, 0.0, false, false};
    Rng rng(seed);
    for (const double r : radii) {
        std::vector<TangentVector> dirs;
        for (int j = 0; j < n; ++j) {
            dirs.push_back(basis.column(j));
            dirs.push_back(-1.0 * basis.column(j));
        }
        for (int k = 0; k < samples_per_radius; ++k) {
            dirs.push_back(random_unit_tangent(rng, p_star));
        }
        double worst = 0.0;
        for (const TangentVector& u : dirs) {
            const ManifoldPoint p = exp_map(p_star, r * u);
            const TangentMap v = x.clarke_element(p, rule);
            worst = std::max(worst, linearization_residual(x, p, p_star, v));
        }
        scan.residuals.push_back(worst);
    }

    const bool any_zero =
        std::any_of(scan.residuals.begin(), scan.residuals.end(),
                    [](double res) { return res == 0.0; });
    if (any_zero) {
        scan.exceeds_scan_precision = true;
        scan.fitted_eps = 0.0;
        scan.fitted_mu = 1.5;
        return scan;
    }

    // Least squares line log(res) = slope * log(r) + intercept.
    const auto m = static_cast<double>(radii.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double lx = std::log(radii[i]);
        const double ly = std::log(scan.residuals[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    const double raw_mu = slope - 1.0;
    scan.mu_exceeds_semismooth_cap = raw_mu > 1.0;
    scan.fitted_mu = std::clamp(raw_mu, 0.0, 1.5);
    scan.fitted_eps = std::exp(intercept);
    return scan;
}

std::optional<double> banach_inverse_bound(const TangentMap& a, const TangentMap& b) {
    if (!(a.base() == b.base())) {
        throw ContractError("banach_inverse_bound: operators at different base points");
    }
    Eigen::JacobiSVD<Matrix> svd_a(a.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd_a.singularValues()(svd_a.singularValues().size() - 1);
    if (smin == 0.0) {
        throw SingularOperatorError("banach_inverse_bound: A is singular", smin);
    }
    const double inv_norm = 1.0 / smin;
    const Matrix diff = b.matrix() - a.matrix();
    if (inv_norm * largest_sv(diff) >= 1.0) {
        return std::nullopt;
    }
    const double contraction = largest_sv(svd_a.solve(diff));
    return inv_norm / (1.0 - contraction);
}

double max_inverse_norm(const VectorField& x, const ManifoldPoint& p, std::uint64_t seed) {
    double worst = 0.0;
    for (const SelectionRule& rule : probe_rules(seed)) {
        const TangentMap v = x.clarke_element(p, rule);
        const double smin = smallest_sv(v.matrix());
        if (smin < kSingularProbeTol) {
            std::ostringstream msg;
            msg << "field is not regular: sampled element has smallest singular value "
                << smin;
            throw SingularOperatorError(msg.str(), smin);
        }
        worst = std::max(worst, 1.0 / smin);
    }
    return worst;
}

double regularity_radius_probe(const VectorField& x, const ManifoldPoint& p_star,
                               double eps, std::vector<double> radii, int samples,
                               std::uint64_t seed) {
    if (samples < 1) {
        throw ContractError("regularity_radius_probe: samples must be >= 1");
    }
    for (const double r : radii) {
        validate_ball(p_star, r, "regularity_radius_probe");
    }
    const double lambda = max_inverse_norm(x, p_star, seed);
    if (!(eps > 0.0) || eps * lambda >= 1.0) {
        throw ContractError("regularity_radius_probe: need 0 < eps with eps*lambda < 1");
    }
    const double bound = lambda / (1.0 - eps * lambda);
    const std::vector<SelectionRule> rules = probe_rules(seed);
    const TangentBasis basis = tangent_basis(p_star);

    std::sort(radii.begin(), radii.end());
    double largest_pass = 0.0;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        const double r = radii[ri];
        std::vector<ManifoldPoint> points;
        for (int j = 0; j < p_star.kind().dimension(); ++j) {
            points.push_back(exp_map(p_star, (0.99 * r) * basis.column(j)));
            points.push_back(exp_map(p_star, (-0.99 * r) * basis.column(j)));
        }
        Rng rng(seed + 0x9e3779b97f4a7c15ull * (ri + 1));
        for (int k = 0; k < samples; ++k) {
            points.push_back(random_point_in_ball(rng, p_star, r));
        }
        bool ok = true;
        for (const ManifoldPoint& p : points) {
            for (const SelectionRule& rule : rules) {
                const double smin = smallest_sv(x.clarke_element(p, rule).matrix());
                if (smin < kSingularProbeTol || 1.0 / smin > bound) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) {
            largest_pass = r;
        }
    }
    return largest_pass;
}

KantorovichCertificate kantorovich_check(const VectorField& x, const ManifoldPoint& p0,
                                         double delta_bar, double eps, double lambda0) {
    if (!(eps > 0.0)) {
        throw ContractError("kantorovich_check: eps must be positive");
    }
    if (!(lambda0 > 0.0)) {
        throw ContractError("kantorovich_check: lambda0 must be positive");
    }
    if (!(delta_bar > 0.0) || delta_bar >= p0.kind().injectivity_radius()) {
        throw ContractError("kantorovich_check: delta_bar must lie in (0, injectivity radius)");
    }
    // Validate against the deterministic rules only, a subset of any
    // measurement's samples, so a measured lambda0 always passes.
    double sampled = 0.0;
    for (const SelectionRule& rule :
         {SelectionRule::midpoint(), SelectionRule::lower(), SelectionRule::upper()}) {
        const double smin = smallest_sv(x.clarke_element(p0, rule).matrix());
        if (smin < kSingularProbeTol) {
            throw SingularOperatorError(
                "kantorovich_check: field is not regular at the start point", smin);
        }
        sampled = std::max(sampled, 1.0 / smin);
    }
    if (lambda0 < sampled * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "kantorovich_check: lambda0 = " << lambda0
            << " is below the sampled inverse-norm bound " << sampled;
        throw ContractError(msg.str());
    }

    KantorovichCertificate cert{p0, lambda0, eps, delta_bar, x.eval(p0).norm(),
                                false, std::nullopt, std::nullopt};
    cert.cond1 = eps * lambda0 < 0.5;
    if (cert.cond1) {
        const double denom = 1.0 - 2.0 * eps * lambda0;
        cert.cond2 = lambda0 * cert.field_norm_p0 / denom <= delta_bar;
        cert.predicted_error_coeff = eps * lambda0 / denom;
    }
    return cert;
}

KantorovichInputs measure_kantorovich_inputs(const VectorField& x, const ManifoldPoint& p0,
                                             const SelectionRule& rule, std::uint64_t seed) {
    SolverConfig presolve_cfg;
    presolve_cfg.max_iters = 100;
    presolve_cfg.tol_field = 1e-14;
    presolve_cfg.selection = rule;
    NewtonTrace presolve = newton_solve(x, p0, presolve_cfg);

    ManifoldPoint solution = x.exact_solution() ? *x.exact_solution() : presolve.final_point();
    if (x.eval(solution).norm() > 1e-10) {
        throw InsufficientDataError(
            "measure_kantorovich_inputs: no singularity to certify against");
    }

    KantorovichInputs inputs{0.0, 0.0, 0.0, solution, std::move(presolve), 0.0};
    inputs.lambda0 = max_inverse_norm(x, p0, seed);

    const double d0 = distance(p0, solution);
    double r0 = std::max(1.5 * d0, 1e-3);
    if (p0.kind().family() == ManifoldFamily::Sphere) {
        r0 = std::min(r0, 0.5 * M_PI);
    }
    const std::vector<double> radii = {r0, 0.5 * r0, 0.25 * r0, 0.125 * r0};

    const SemismoothScan scan = semismooth_scan(x, solution, radii, 32, rule, seed);
    for (std::size_t i = 0; i < scan.radii.size(); ++i) {
        inputs.eps = std::max(inputs.eps, scan.residuals[i] / scan.radii[i]);
    }
    for (std::size_t k = 0; k + 1 < inputs.presolve.iterates.size(); ++k) {
        const ManifoldPoint& prev = inputs.presolve.iterates[k];
        const ManifoldPoint& next = inputs.presolve.iterates[k + 1];
        const double d = distance(prev, next);
        if (d < kOrderFloor) {
            continue;
        }
        inputs.eps = std::max(
            inputs.eps,
            linearization_residual(x, prev, next, inputs.presolve.clarke_elements[k]) / d);
    }

    // Opposite direction: linearize at the solution. This is what the
    // uniqueness argument consumes; reported separately because the kink
    // interval at the solution makes it rule-dependent.
    const TangentMap v_star = x.clarke_element(solution, rule);
    const TangentBasis basis = tangent_basis(solution);
    Rng rng(seed ^ 0x72657665ull);
    for (const double r : radii) {
        std::vector<TangentVector> dirs;
        for (int j = 0; j < solution.kind().dimension(); ++j) {
            dirs.push_back(basis.column(j));
            dirs.push_back(-1.0 * basis.column(j));
        }
        for (int k = 0; k < 16; ++k) {
            dirs.push_back(random_unit_tangent(rng, solution));
        }
        for (const TangentVector& u : dirs) {
            const ManifoldPoint q = exp_map(solution, r * u);
            inputs.eps_reverse = std::max(
                inputs.eps_reverse,
                linearization_residual(x, solution, q, v_star) / distance(solution, q));
        }
    }

    if (inputs.eps > 0.0 && inputs.eps * inputs.lambda0 < 0.5) {
        const double bound = inputs.lambda0 * x.eval(p0).norm() /
                             (1.0 - 2.0 * inputs.eps * inputs.lambda0);
        double delta_bar = std::max(1.2 * bound, 1e-6);
        if (p0.kind().family() == ManifoldFamily::Sphere) {
            delta_bar = std::min(delta_bar, M_PI - 1e-3);
        }
        inputs.suggested_delta_bar = delta_bar;
    }
    return inputs;
}

OrderEstimate estimate_order(const NewtonTrace& trace, const ManifoldPoint& p_star) {
    if (trace.iterates.size() < 4) {
        throw InsufficientDataError("estimate_order: need at least 4 iterates");
    }
    std::vector<double> d;
    d.reserve(trace.iterates.size());
    for (const ManifoldPoint& p : trace.iterates) {
        d.push_back(distance(p, p_star));
    }

    OrderEstimate estimate;
    for (std::size_t k = 1; k + 1 < d.size(); ++k) {
        if (d[k + 1] < kOrderFloor || d[k] <= 0.0 || d[k - 1] <= 0.0) {
            continue;
        }
        const double contraction = d[k] / d[k - 1];
        if (contraction > 0.5) {
            continue;
        }
        estimate.orders.push_back(std::log(d[k + 1] / d[k]) / std::log(contraction));
    }
    if (estimate.orders.empty()) {
        throw InsufficientDataError("estimate_order: no valid order quotients");
    }
    estimate.final_order = median_of_tail(estimate.orders, 3);

    std::vector<double> ratios;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        if (d[k + 1] >= kOrderFloor && d[k] > 0.0) {
            ratios.push_back(d[k + 1] / d[k]);
        }
    }
    estimate.superlinear = ratios.size() >= 2;
    for (std::size_t k = 0; k + 1 < ratios.size(); ++k) {
        if (!(ratios[k + 1] < ratios[k])) {
            estimate.superlinear = false;
        }
    }
    if (estimate.superlinear && !(ratios.back() < 0.5 * ratios.front())) {
        estimate.superlinear = false;
    }
    return estimate;
}

} // namespace ssn
