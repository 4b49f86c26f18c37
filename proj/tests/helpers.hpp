#pragma once

#include <cmath>

#include "ssn/fields.hpp"
#include "ssn/geometry.hpp"
#include "ssn/random.hpp"

namespace ssn::testing {

inline Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<long>(values.size()));
    int i = 0;
    for (const double x : values) v(i++) = x;
    return v;
}

inline ManifoldPoint sphere_point(std::initializer_list<double> coords) {
    const Vector c = vec(coords);
    return ManifoldPoint(ManifoldKind::sphere(static_cast<int>(c.size()) - 1), c);
}

inline ManifoldPoint euclidean_point(std::initializer_list<double> coords) {
    const Vector c = vec(coords);
    return ManifoldPoint(ManifoldKind::euclidean(static_cast<int>(c.size())), c);
}

inline ManifoldPoint circle_point(double angle) {
    return sphere_point({std::sin(angle), std::cos(angle)});
}

inline ManifoldPoint random_sphere_point(Rng& rng, int dim) {
    const Vector c = rng.unit_vector(dim + 1);
    return ManifoldPoint(ManifoldKind::sphere(dim), c);
}

/// Example instance on the circle: ambient map A x - |x| - b with
/// A = diag(4,3), b = (0,2), projected to S^1; root at (0,1).
inline std::shared_ptr<const VectorField> circle_abs_instance() {
    return find_battery_field("example51")->field;
}

} // namespace ssn::testing
