#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ssn/oracle.hpp"
#include "ssn/random.hpp"

using namespace ssn;
using namespace ssn::testing;

namespace {

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m.diagonal() << a, b;
    return m;
}

/// Unique root of diag(4,3) x - |x| = (0,2) by enumeration of the four sign
/// orthants: only x1 >= 0, x2 >= 0 is consistent and gives (0, 1).
Vector orthant_enumeration_root() {
    Matrix a = diag2(4.0, 3.0);
    const Vector b = vec({0.0, 2.0});
    Vector root;
    int hits = 0;
    for (const double s1 : {1.0, -1.0}) {
        for (const double s2 : {1.0, -1.0}) {
            Matrix piece = a;
            piece(0, 0) -= s1;
            piece(1, 1) -= s2;
            const Vector x = piece.lu().solve(b);
            if (s1 * x(0) >= 0.0 && s2 * x(1) >= 0.0) {
                if (hits == 0) root = x;
                ++hits;
            }
        }
    }
    REQUIRE(hits >= 1);
    return root;
}

} // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("directional differences are exact on flat linear maps") {
    Matrix a(2, 2);
    a << 2.0, -1.0, 0.5, 3.0;
    const auto field = euclidean_field(linear_field(a, vec({1.0, -2.0})));
    const ManifoldPoint p = euclidean_point({0.3, -0.7});
    const TangentVector v(p, vec({1.2, 0.4}));

    const TangentVector dv = oracle::fd_directional_derivative(*field, p, v);
    CHECK((dv.comps() - a * v.comps()).cwiseAbs().maxCoeff() <= 1e-10);

    const TangentVector zero(p, vec({0.0, 0.0}));
    CHECK(oracle::fd_directional_derivative(*field, p, zero).norm() == 0.0);

    CHECK_THROWS_AS(oracle::fd_directional_derivative(*field, p, v, 1e-3), ContractError);
    CHECK_THROWS_AS(oracle::fd_directional_derivative(*field, p, v, 0.0), ContractError);
}

TEST_CASE("projected constant field has derivative -(p.c) I on the circle") {
    const Vector c = vec({1.0, 2.0});
    Matrix zero2 = Matrix::Zero(2, 2);
    const auto field = projected_field(linear_field(zero2, -c)); // Y(p) = c
    Rng rng(101);
    for (int k = 0; k < 25; ++k) {
        const ManifoldPoint p = random_sphere_point(rng, 1);
        const TangentVector v = random_unit_tangent(rng, p);
        const TangentVector dv = oracle::fd_directional_derivative(*field, p, v);
        const double expected = -p.coords().dot(c);
        CHECK((dv.comps() - expected * v.comps()).cwiseAbs().maxCoeff() <= 1e-8);
        const TangentMap m = oracle::fd_covariant_derivative(*field, p);
        CHECK(std::abs(m.matrix()(0, 0) - expected) <= 1e-8);
    }
}

TEST_CASE("covariant difference matrix vanishes on the zero field") {
    Matrix zero3 = Matrix::Zero(3, 3);
    const auto field = projected_field(linear_field(zero3, Vector::Zero(3)));
    const TangentMap m =
        oracle::fd_covariant_derivative(*field, sphere_point({0.0, 0.0, 1.0}));
    CHECK(m.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("central differences converge at second order") {
    const auto& smooth = *find_battery_field("smooth-proj");
    const ManifoldPoint p = sphere_point({0.6, 0.0, 0.8});
    const Matrix exact = smooth.field->clarke_element(p, SelectionRule::midpoint()).matrix();
    const double err1 =
        (oracle::fd_covariant_derivative(*smooth.field, p, 1e-4).matrix() - exact)
            .cwiseAbs()
            .maxCoeff();
    const double err2 =
        (oracle::fd_covariant_derivative(*smooth.field, p, 5e-5).matrix() - exact)
            .cwiseAbs()
            .maxCoeff();
    CHECK(err1 / err2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("integrated transport matches the closed form") {
    const ManifoldPoint p = sphere_point({0.0, 1.0});
    const TangentVector v(p, vec({0.7, 0.0}));
    CHECK(oracle::ode_parallel_transport(p, p, v, 10).comps() == v.comps());

    const ManifoldPoint q = sphere_point({1.0, 0.0});
    const TangentVector quarter = oracle::ode_parallel_transport(p, q, v, 1000);
    CHECK(std::abs(quarter.comps()(0)) <= 1e-10);
    CHECK(quarter.comps()(1) == doctest::Approx(-0.7).epsilon(1e-10));

    Rng rng(103);
    for (int k = 0; k < 20; ++k) {
        const ManifoldPoint a = random_sphere_point(rng, 2);
        ManifoldPoint b = random_sphere_point(rng, 2);
        while (distance(a, b) > M_PI / 2.0) {
            b = random_sphere_point(rng, 2);
        }
        const TangentVector w = rng.uniform(0.2, 2.0) * random_unit_tangent(rng, a);
        const TangentVector integrated = oracle::ode_parallel_transport(a, b, w, 1000);
        const TangentVector closed = parallel_transport(a, b, w);
        CHECK((integrated.comps() - closed.comps()).norm() <= 1e-8);
    }

    const ManifoldPoint antipode = sphere_point({0.0, -1.0});
    CHECK_THROWS_AS(oracle::ode_parallel_transport(p, antipode, v, 100),
                    GeodesicDomainError);
}

TEST_CASE("flat recursion: linear fields converge in one step") {
    Matrix a(2, 2);
    a << 2.0, 1.0, 0.0, 4.0;
    const auto y = linear_field(a, vec({1.0, 2.0}));
    const oracle::FlatTrace trace =
        oracle::flat_semismooth_newton(*y, vec({5.0, -3.0}), SolverConfig{});
    CHECK(trace.termination == TerminationReason::FieldTolerance);
    CHECK(trace.iterates.size() == 2);
    CHECK(y->eval(trace.iterates.back()).norm() <= 1e-12);
}

TEST_CASE("flat recursion on the abs instance reaches the orthant-enumeration root") {
    const auto y = abs_field(diag2(4.0, 3.0), vec({0.0, 2.0}));
    const Vector root = orthant_enumeration_root();
    CHECK((root - vec({0.0, 1.0})).cwiseAbs().maxCoeff() <= 1e-15);

    const oracle::FlatTrace trace =
        oracle::flat_semismooth_newton(*y, vec({0.1, 1.1}), SolverConfig{});
    CHECK(trace.termination == TerminationReason::FieldTolerance);
    CHECK((trace.iterates.back() - root).cwiseAbs().maxCoeff() <= 1e-12);

    // A start at the root stops without stepping.
    const oracle::FlatTrace at_root =
        oracle::flat_semismooth_newton(*y, root, SolverConfig{});
    CHECK(at_root.iterates.size() == 1);
    CHECK(at_root.termination == TerminationReason::FieldTolerance);
}

TEST_CASE("flat recursion flags singular elements") {
    Matrix a(2, 2);
    a << 1.0, 1.0, 1.0, 1.0;
    const auto y = linear_field(a, vec({1.0, 2.0}));
    const oracle::FlatTrace trace =
        oracle::flat_semismooth_newton(*y, vec({0.0, 0.0}), SolverConfig{});
    CHECK(trace.termination == TerminationReason::SingularElement);
}

TEST_SUITE_END();
