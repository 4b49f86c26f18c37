// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs the full battery through the public API plus the CLI.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ssn/analysis.hpp"
#include "ssn/cli.hpp"
#include "ssn/fields.hpp"
#include "ssn/oracle.hpp"
#include "ssn/random.hpp"
#include "ssn/solver.hpp"

using namespace ssn;

namespace {

int failures = 0;
std::ostringstream detail;

void report(int number, const char* description, bool ok) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", number, description);
    if (!ok) {
        ++failures;
        const std::string text = detail.str();
        if (!text.empty()) {
            std::printf("       %s\n", text.c_str());
        }
    }
    detail.str("");
    detail.clear();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

const ManifoldPoint circle_root() {
    return ManifoldPoint(ManifoldKind::sphere(1), vec2(0.0, 1.0));
}

// ---------------------------------------------------------------------------
// 1. Circle instance: 20 seeded starts at distance 0.1, every selection rule,
//    convergence to the root within 1e-12 in at most 10 iterations, under 1s.
bool criterion1() {
    const auto& entry = *find_battery_field("example51");
    const ManifoldPoint root = circle_root();
    const std::vector<SelectionRule> rules = {
        SelectionRule::midpoint(), SelectionRule::lower(), SelectionRule::upper(),
        SelectionRule::random_vertex(123), SelectionRule::random_vertex(9001)};

    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const ManifoldPoint p0 = exp_map(root, 0.1 * random_unit_tangent(rng, root));
        for (const SelectionRule& rule : rules) {
            SolverConfig cfg;
            cfg.selection = rule;
            const NewtonTrace trace = newton_solve(*entry.field, p0, cfg);
            const double dist = distance(trace.final_point(), root);
            if (trace.termination != TerminationReason::FieldTolerance ||
                trace.step_norms.size() > 10 || dist > 1e-12) {
                detail << "seed " << seed << ": dist " << dist << " after "
                       << trace.step_norms.size() << " steps";
                ok = false;
            }
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 1.0) {
        detail << "elapsed " << elapsed << "s";
        ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 2. Convergence orders: >= 1.5 on the circle instance, >= 1.8 on the smooth
//    field, monotone ratios toward zero on the planted kink, under 5s.
bool criterion2() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;

    {
        const auto& entry = *find_battery_field("example51");
        Rng rng(7);
        const ManifoldPoint root = circle_root();
        const ManifoldPoint p0 = exp_map(root, 0.1 * random_unit_tangent(rng, root));
        const NewtonTrace trace = newton_solve(*entry.field, p0, SolverConfig{});
        const OrderEstimate order = estimate_order(trace, root);
        if (order.final_order < 1.5) {
            detail << "circle order " << order.final_order << "; ";
            ok = false;
        }
    }
    {
        const auto& entry = *find_battery_field("smooth-proj");
        const ManifoldPoint star = *entry.field->exact_solution();
        Rng rng(1);
        const ManifoldPoint p0 = exp_map(star, 0.2 * random_unit_tangent(rng, star));
        const NewtonTrace trace = newton_solve(*entry.field, p0, SolverConfig{});
        const OrderEstimate order = estimate_order(trace, star);
        if (order.final_order < 1.8) {
            detail << "smooth order " << order.final_order << "; ";
            ok = false;
        }
    }
    {
        const auto& entry = *find_battery_field("maxcomp-s2");
        const ManifoldPoint star = *entry.field->exact_solution();
        Rng rng(1);
        const ManifoldPoint p0 = exp_map(star, 0.3 * random_unit_tangent(rng, star));
        const NewtonTrace trace = newton_solve(*entry.field, p0, SolverConfig{});
        const OrderEstimate order = estimate_order(trace, star);
        std::vector<double> ratios;
        for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
            const double dk = distance(trace.iterates[k], star);
            const double dn = distance(trace.iterates[k + 1], star);
            if (dn >= 1e-13 && dk > 0.0) {
                ratios.push_back(dn / dk);
            }
        }
        bool monotone = ratios.size() >= 2;
        for (std::size_t k = 0; k + 1 < ratios.size(); ++k) {
            monotone = monotone && ratios[k + 1] < ratios[k];
        }
        if (!monotone || !order.superlinear) {
            detail << "kink ratios not monotone (superlinear="
                   << (order.superlinear ? "true" : "false") << "); ";
            ok = false;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 5.0) {
        detail << "elapsed " << elapsed << "s";
        ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 3. Flat reduction: the manifold solver on flat space tracks the classical
//    recursion to 1e-12 per component, and the limit is the orthant root (0,1).
bool criterion3() {
    const auto& entry = *find_battery_field("abs-flat");
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 4.0, 3.0;
    const auto ambient = abs_field(a, vec2(0.0, 2.0));

    // Orthant enumeration: solve (A - D) x = b over the four sign patterns and
    // keep the sign-consistent root.
    Vector root;
    bool found = false;
    for (const double s1 : {1.0, -1.0}) {
        for (const double s2 : {1.0, -1.0}) {
            Matrix piece = a;
            piece(0, 0) -= s1;
            piece(1, 1) -= s2;
            const Vector x = piece.lu().solve(vec2(0.0, 2.0));
            if (s1 * x(0) >= 0.0 && s2 * x(1) >= 0.0 && !found) {
                root = x;
                found = true;
            }
        }
    }
    if (!found || (root - vec2(0.0, 1.0)).cwiseAbs().maxCoeff() > 1e-15) {
        detail << "orthant enumeration failed";
        return false;
    }

    bool ok = true;
    for (const Vector& x0 : {vec2(0.1, 1.1), vec2(-0.2, 0.8), vec2(0.05, 1.3)}) {
        const ManifoldPoint p0(ManifoldKind::euclidean(2), x0);
        const NewtonTrace trace = newton_solve(*entry.field, p0, SolverConfig{});
        const oracle::FlatTrace flat =
            oracle::flat_semismooth_newton(*ambient, x0, SolverConfig{});
        if (trace.iterates.size() != flat.iterates.size()) {
            detail << "trace lengths differ; ";
            ok = false;
            continue;
        }
        for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
            if ((trace.iterates[k].coords() - flat.iterates[k]).cwiseAbs().maxCoeff() >
                1e-12) {
                detail << "iterate " << k << " deviates; ";
                ok = false;
            }
        }
        if ((trace.final_point().coords() - root).cwiseAbs().maxCoeff() > 1e-12) {
            detail << "limit misses the orthant root; ";
            ok = false;
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 4. Geometry: round trips 1e-10 over 1e4 pairs, transport isometry 1e-12,
//    agreement with the integrated transport 1e-8, composition 1e-10.
bool criterion4() {
    Rng rng(2024);
    bool ok = true;
    const ManifoldKind s2 = ManifoldKind::sphere(2);
    double worst_round_trip = 0.0;
    double worst_isometry = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const ManifoldPoint p(s2, rng.unit_vector(3));
        ManifoldPoint q(s2, rng.unit_vector(3));
        while (distance(p, q) > M_PI - 1e-3) {
            q = ManifoldPoint(s2, rng.unit_vector(3));
        }
        const TangentVector v = log_map(p, q);
        worst_round_trip = std::max(worst_round_trip, distance(exp_map(p, v), q));

        const TangentVector u = rng.uniform(0.1, 2.0) * random_unit_tangent(rng, p);
        const TangentVector w = rng.uniform(0.1, 2.0) * random_unit_tangent(rng, p);
        const TangentVector pu = parallel_transport(p, q, u);
        const TangentVector pw = parallel_transport(p, q, w);
        worst_isometry = std::max(worst_isometry, std::abs(pu.norm() - u.norm()));
        worst_isometry = std::max(
            worst_isometry, std::abs(pu.comps().dot(pw.comps()) - u.comps().dot(w.comps())));
    }
    if (worst_round_trip > 1e-10) {
        detail << "round trip " << worst_round_trip << "; ";
        ok = false;
    }
    if (worst_isometry > 1e-12) {
        detail << "isometry defect " << worst_isometry << "; ";
        ok = false;
    }

    double worst_ode = 0.0;
    for (int k = 0; k < 25; ++k) {
        const ManifoldPoint p(s2, rng.unit_vector(3));
        ManifoldPoint q(s2, rng.unit_vector(3));
        while (distance(p, q) > M_PI / 2.0) {
            q = ManifoldPoint(s2, rng.unit_vector(3));
        }
        const TangentVector v = rng.uniform(0.2, 2.0) * random_unit_tangent(rng, p);
        const TangentVector integrated = oracle::ode_parallel_transport(p, q, v, 1000);
        const TangentVector closed = parallel_transport(p, q, v);
        worst_ode = std::max(worst_ode, (integrated.comps() - closed.comps()).norm());
    }
    if (worst_ode > 1e-8) {
        detail << "integrated transport " << worst_ode << "; ";
        ok = false;
    }

    double worst_composition = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const ManifoldPoint p(s2, rng.unit_vector(3));
        const TangentVector dir = random_unit_tangent(rng, p);
        const double reach = rng.uniform(0.2, M_PI - 0.1);
        const ManifoldPoint mid = exp_map(p, (0.5 * reach) * dir);
        const ManifoldPoint far = exp_map(p, reach * dir);
        const TangentVector v = rng.uniform(0.1, 2.0) * random_unit_tangent(rng, p);
        const TangentVector hop = parallel_transport(mid, far, parallel_transport(p, mid, v));
        const TangentVector direct = parallel_transport(p, far, v);
        worst_composition =
            std::max(worst_composition, (hop.comps() - direct.comps()).norm());
    }
    if (worst_composition > 1e-10) {
        detail << "composition " << worst_composition;
        ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 5. Geodesic spread on the sphere: the sampled constant is one to 1e-9, and
//    collinear rays give the ratio one to 1e-12.
bool criterion5() {
    const ManifoldPoint pole(ManifoldKind::sphere(2), Vector::Unit(3, 2));
    const double kp = estimate_kp(ManifoldKind::sphere(2), pole, 10000, 77);
    bool ok = true;
    if (kp < 1.0 - 1e-9 || kp > 1.0 + 1e-9) {
        detail << "kp " << kp << "; ";
        ok = false;
    }
    Rng rng(78);
    for (int k = 0; k < 200; ++k) {
        const ManifoldPoint q(ManifoldKind::sphere(2), rng.unit_vector(3));
        const TangentVector w = random_unit_tangent(rng, q);
        const TangentVector u = rng.uniform(0.2, 1.5) * w;
        const TangentVector v = rng.uniform(-1.5, -0.2) * w;
        const double ratio = distance(exp_map(q, u), exp_map(q, v)) / (u - v).norm();
        if (std::abs(ratio - 1.0) > 1e-12) {
            detail << "collinear ratio " << ratio;
            ok = false;
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 6. Derivative elements agree with central differences at 1e3 random
//    differentiability points per field; transported elements close in on the
//    derivative interval near the circle kink.
bool criterion6() {
    bool ok = true;
    Rng rng(90);
    for (const auto& entry : test_battery()) {
        const ManifoldKind kind = entry.field->manifold();
        double worst = 0.0;
        int tested = 0;
        while (tested < 1000) {
            ManifoldPoint p = kind.family() == ManifoldFamily::Sphere
                                  ? ManifoldPoint(kind, rng.unit_vector(kind.ambient_dimension()))
                                  : exp_map(*entry.field->exact_solution(),
                                            1.5 * random_unit_tangent(
                                                      rng, *entry.field->exact_solution()));
            if (entry.id == "example51" || entry.id == "abs-flat") {
                if (p.coords().cwiseAbs().minCoeff() <= 1e-3) continue;
            } else if (entry.id == "maxcomp-s2") {
                Matrix c(3, 3), d(3, 3);
                c << 3, 0, 1, 0, 4, 2, 1, 1, 5;
                d << 2, 0, 1, 0, 1, 1, -1, 1, 5;
                if (((c - d) * p.coords()).cwiseAbs().minCoeff() <= 1e-3) continue;
            }
            ++tested;
            const Matrix element =
                entry.field->clarke_element(p, SelectionRule::midpoint()).matrix();
            const Matrix fd = oracle::fd_covariant_derivative(*entry.field, p).matrix();
            worst = std::max(worst, (element - fd).cwiseAbs().maxCoeff());
        }
        if (worst > 1e-6) {
            detail << entry.id << " fd deviation " << worst << "; ";
            ok = false;
        }
    }

    const auto& circle = *find_battery_field("example51");
    const ManifoldPoint root = circle_root();
    const auto hull_distance = [&](double radius) {
        double worst = 0.0;
        for (const double sign : {1.0, -1.0}) {
            const ManifoldPoint q(ManifoldKind::sphere(1),
                                  vec2(std::sin(sign * radius), std::cos(sign * radius)));
            const TangentMap vq = circle.field->clarke_element(q, SelectionRule::midpoint());
            const double m = transport_operator(vq, root).matrix()(0, 0);
            worst = std::max(worst, std::max({0.0, 3.0 - m, m - 5.0}));
        }
        return worst;
    };
    const double d2 = hull_distance(1e-2);
    const double d4 = hull_distance(1e-4);
    const double d6 = hull_distance(1e-6);
    if (!(d2 > d4 && d4 > d6)) {
        detail << "hull distances " << d2 << " " << d4 << " " << d6;
        ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 7. Semismoothness scans: exponent >= 0.85 on the circle instance, 1 +- 0.15
//    on the smooth field, exactly zero residuals on a flat linear field.
bool criterion7() {
    bool ok = true;
    const std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4};

    const auto& circle = *find_battery_field("example51");
    const SemismoothScan circle_scan = semismooth_scan(
        *circle.field, circle_root(), radii, 64, SelectionRule::midpoint(), 31);
    if (circle_scan.fitted_mu < 0.85) {
        detail << "circle mu " << circle_scan.fitted_mu << "; ";
        ok = false;
    }

    const auto& smooth = *find_battery_field("smooth-proj");
    const SemismoothScan smooth_scan =
        semismooth_scan(*smooth.field, *smooth.field->exact_solution(), radii, 64,
                        SelectionRule::midpoint(), 31);
    if (std::abs(smooth_scan.fitted_mu - 1.0) > 0.15) {
        detail << "smooth mu " << smooth_scan.fitted_mu << "; ";
        ok = false;
    }

    Matrix a(2, 2);
    a << 2.0, 1.0, 0.5, 3.0;
    const auto flat_linear = euclidean_field(linear_field(a, Vector::Zero(2)));
    const ManifoldPoint origin(ManifoldKind::euclidean(2), Vector::Zero(2));
    const SemismoothScan linear_scan =
        semismooth_scan(*flat_linear, origin, radii, 16, SelectionRule::midpoint(), 31);
    bool all_zero = linear_scan.exceeds_scan_precision;
    for (const double res : linear_scan.residuals) {
        all_zero = all_zero && res == 0.0;
    }
    if (!all_zero) {
        detail << "linear residuals not exactly zero";
        ok = false;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 8. Measured certificate on the circle instance: both inequalities hold, the
//    error bound holds at every iterate, and 50 starts in the certified ball
//    reach the same singularity.
bool criterion8() {
    const auto& entry = *find_battery_field("example51");
    const ManifoldPoint p0(ManifoldKind::sphere(1), vec2(std::sin(0.05), std::cos(0.05)));
    const KantorovichInputs inputs =
        measure_kantorovich_inputs(*entry.field, p0, SelectionRule::midpoint(), 55);
    if (inputs.suggested_delta_bar <= 0.0) {
        detail << "measured constants infeasible";
        return false;
    }
    const KantorovichCertificate cert = kantorovich_check(
        *entry.field, p0, inputs.suggested_delta_bar, inputs.eps, inputs.lambda0);
    bool ok = true;
    if (!cert.cond1 || !cert.cond2.has_value() || !*cert.cond2) {
        detail << "certificate verdicts false; ";
        ok = false;
    }

    const ManifoldPoint star = circle_root();
    const double coeff = cert.predicted_error_coeff.value_or(0.0);
    const NewtonTrace certified = newton_solve(*entry.field, p0, SolverConfig{});
    for (std::size_t k = 1; k < certified.iterates.size(); ++k) {
        const double err = distance(certified.iterates[k], star);
        const double step = distance(certified.iterates[k], certified.iterates[k - 1]);
        if (err > coeff * step) {
            detail << "error bound fails at k=" << k << "; ";
            ok = false;
        }
    }

    Rng rng(56);
    ManifoldPoint first_limit = star;
    for (int k = 0; k < 50; ++k) {
        const double r = inputs.suggested_delta_bar * rng.uniform();
        const ManifoldPoint start = exp_map(p0, r * random_unit_tangent(rng, p0));
        const NewtonTrace trace = newton_solve(*entry.field, start, SolverConfig{});
        if (k == 0) {
            first_limit = trace.final_point();
        } else if (distance(trace.final_point(), first_limit) > 1e-10) {
            detail << "limits disagree by " << distance(trace.final_point(), first_limit);
            ok = false;
        }
    }
    return ok;
}

// ---------------------------------------------------------------------------
// 9. Reproducibility: the same experiment with the same seed writes a
//    byte-identical trace file.
bool criterion9() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ssn-acceptance";
    fs::create_directories(dir);
    cli::ExperimentConfig cfg;
    cfg.field_id = "example51";
    cfg.start = "auto:distance=0.1,seed=5";
    cfg.seed = 5;
    cfg.analyses = {"order", "kp"};
    cfg.out = (dir / "run-a").string();
    const int first = cli::run_experiment(cfg);
    cfg.out = (dir / "run-b").string();
    const int second = cli::run_experiment(cfg);

    const auto slurp = [](const fs::path& path) {
        std::ifstream is(path, std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        return os.str();
    };
    bool ok = first == 0 && second == 0;
    const std::string csv_a = slurp(dir / "run-a.trace.csv");
    ok = ok && !csv_a.empty() && csv_a == slurp(dir / "run-b.trace.csv");
    ok = ok && slurp(dir / "run-a.report.txt") == slurp(dir / "run-b.report.txt");
    if (!ok) {
        detail << "artifacts differ between identical runs";
    }
    fs::remove_all(dir);
    return ok;
}

} // namespace

int main() {
    report(1, "circle instance: 20 starts x 5 rules reach the root in <= 10 steps",
           criterion1());
    report(2, "convergence orders: 1.5 (circle), 1.8 (smooth), monotone kink ratios",
           criterion2());
    report(3, "flat-space runs match the classical recursion and the orthant root",
           criterion3());
    report(4, "geometry: round trips, transport isometry, integrated transport, composition",
           criterion4());
    report(5, "geodesic spread constant is one on the sphere", criterion5());
    report(6, "derivative elements match central differences; interval closure at the kink",
           criterion6());
    report(7, "semismoothness scans fit the expected exponents", criterion7());
    report(8, "measured certificate holds and the certified ball is a basin", criterion8());
    report(9, "identical seeds give byte-identical artifacts", criterion9());

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 9 criteria passed\n");
    return 0;
}
