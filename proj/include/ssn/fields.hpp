#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssn/geometry.hpp"
#include "ssn/tangent_map.hpp"

namespace ssn {

/// Picks one element of a generalized-derivative interval at nondifferentiable
/// points. At differentiability points every rule returns the same matrix.
/// RandomVertex is stateless between calls: each decision hashes the seed
/// together with the evaluation point and component index.
struct SelectionRule {
    enum class Kind { Midpoint, LowerEndpoint, UpperEndpoint, RandomVertex };

    Kind kind = Kind::Midpoint;
    std::uint64_t seed = 0;

    static SelectionRule midpoint() { return {Kind::Midpoint, 0}; }
    static SelectionRule lower() { return {Kind::LowerEndpoint, 0}; }
    static SelectionRule upper() { return {Kind::UpperEndpoint, 0}; }
    static SelectionRule random_vertex(std::uint64_t seed) {
        return {Kind::RandomVertex, seed};
    }

    /// Convex weight in [0,1] selecting a point of a kink interval
    /// (0 = lower endpoint, 1 = upper endpoint).
    [[nodiscard]] double kink_weight(const Vector& point, int component) const;
};

/// Nonsmooth mapping on the ambient space R^m with a selectable generalized
/// Jacobian element.
class AmbientMap {
public:
    virtual ~AmbientMap() = default;
    [[nodiscard]] virtual int dimension() const = 0;
    [[nodiscard]] virtual Vector eval(const Vector& x) const = 0;
    [[nodiscard]] virtual Matrix clarke_element(const Vector& x,
                                                const SelectionRule& rule) const = 0;
};

/// Nonsmooth vector field on the manifold: evaluation plus one selectable
/// element of the generalized covariant derivative per point.
class VectorField {
public:
    virtual ~VectorField() = default;
    [[nodiscard]] virtual ManifoldKind manifold() const = 0;
    [[nodiscard]] virtual TangentVector eval(const ManifoldPoint& p) const = 0;
    [[nodiscard]] virtual TangentMap clarke_element(const ManifoldPoint& p,
                                                    const SelectionRule& rule) const = 0;
    /// Known singularity, for test instances built around one.
    [[nodiscard]] virtual std::optional<ManifoldPoint> exact_solution() const {
        return std::nullopt;
    }
};

/// Kinks are located by comparison against this snap tolerance; hitting one
/// inexactly has probability zero under the samplers used here.
inline constexpr double kKinkSnapTol = 1e-14;

/// Y(x) = A x - |x| - b with componentwise absolute value. Generalized
/// Jacobian A - D, D diagonal with D_ii = sign(x_i) away from kinks and a
/// rule-selected value in [-1, 1] on them.
std::shared_ptr<AmbientMap> abs_field(Matrix a, Vector b);

/// Smooth affine map Y(x) = A x - b; the derivative element is always A.
std::shared_ptr<AmbientMap> linear_field(Matrix a, Vector b);

/// Y_i(x) = max(c_i.x, d_i.x) - e_i over the rows of C and D. On ties the
/// element row is the rule-selected convex combination of c_i and d_i.
std::shared_ptr<AmbientMap> max_affine_field(Matrix c, Matrix d, Vector e);

/// Projects an ambient map onto the sphere S^{m-1}: X(p) = (I - p p^T) Y(p).
/// Derivative elements are (I - p p^T) Vy - (p.Y(p)) I compressed to the
/// tangent basis.
std::shared_ptr<VectorField> projected_field(
    std::shared_ptr<const AmbientMap> y,
    std::optional<ManifoldPoint> solution = std::nullopt);

/// Wraps an ambient map as a vector field on flat space (tangent basis is the
/// standard basis, so the element matrix is the ambient one).
std::shared_ptr<VectorField> euclidean_field(
    std::shared_ptr<const AmbientMap> y,
    std::optional<ManifoldPoint> solution = std::nullopt);

/// One benchmark instance with a known solution.
struct BatteryEntry {
    std::string id;
    std::shared_ptr<const VectorField> field;
    /// Semismoothness exponent the instance is built to exhibit.
    double expected_mu;
    /// How the known solution was arranged.
    std::string planting;
};

/// The built-in instances, in stable order. Ids: example51, smooth-proj,
/// maxcomp-s2, abs-flat.
const std::vector<BatteryEntry>& test_battery();

/// Entry lookup by id; nullptr when unknown.
const BatteryEntry* find_battery_field(std::string_view id);

} // namespace ssn
