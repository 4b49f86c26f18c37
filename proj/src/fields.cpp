#include "ssn/fields.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

namespace ssn {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

void require_dimension(const AmbientMap& y, const Vector& x) {
    if (x.size() != y.dimension()) {
        std::ostringstream msg;
        msg << "ambient map of dimension " << y.dimension() << " applied to a vector of size "
            << x.size();
        throw ContractError(msg.str());
    }
}

class AbsField final : public AmbientMap {
public:
    AbsField(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
            throw ContractError("abs_field: A must be square and match b");
        }
    }

    int dimension() const override { return static_cast<int>(b_.size()); }

    Vector eval(const Vector& x) const override {
        require_dimension(*this, x);
        return a_ * x - x.cwiseAbs() - b_;
    }

    Matrix clarke_element(const Vector& x, const SelectionRule& rule) const override {
        require_dimension(*this, x);
        Matrix m = a_;
        for (int i = 0; i < x.size(); ++i) {
            if (std::abs(x(i)) > kKinkSnapTol) {
                m(i, i) -= x(i) > 0.0 ? 1.0 : -1.0;
            } else {
                m(i, i) -= -1.0 + 2.0 * rule.kink_weight(x, i);
            }
        }
        return m;
    }

private:
    Matrix a_;
    Vector b_;
};

class LinearField final : public AmbientMap {
public:
    LinearField(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
            throw ContractError("linear_field: A must be square and match b");
        }
    }

    int dimension() const override { return static_cast<int>(b_.size()); }
    Vector eval(const Vector& x) const override {
        require_dimension(*this, x);
        return a_ * x - b_;
    }
    Matrix clarke_element(const Vector& x, const SelectionRule&) const override {
        require_dimension(*this, x);
        return a_;
    }

private:
    Matrix a_;
    Vector b_;
};

class MaxAffineField final : public AmbientMap {
public:
    MaxAffineField(Matrix c, Matrix d, Vector e)
        : c_(std::move(c)), d_(std::move(d)), e_(std::move(e)) {
        if (c_.rows() != d_.rows() || c_.cols() != d_.cols() || c_.rows() != e_.size() ||
            c_.rows() != c_.cols()) {
            throw ContractError("max_affine_field: C, D, e dimensions disagree");
        }
    }

    int dimension() const override { return static_cast<int>(e_.size()); }

    Vector eval(const Vector& x) const override {
        require_dimension(*this, x);
        Vector y(e_.size());
        for (int i = 0; i < e_.size(); ++i) {
            y(i) = std::max(c_.row(i).dot(x), d_.row(i).dot(x)) - e_(i);
        }
        return y;
    }

    Matrix clarke_element(const Vector& x, const SelectionRule& rule) const override {
        require_dimension(*this, x);
        Matrix m(e_.size(), x.size());
        for (int i = 0; i < e_.size(); ++i) {
            const double gap = c_.row(i).dot(x) - d_.row(i).dot(x);
            if (gap > kKinkSnapTol) {
                m.row(i) = c_.row(i);
            } else if (gap < -kKinkSnapTol) {
                m.row(i) = d_.row(i);
            } else {
                const double w = rule.kink_weight(x, i);
                m.row(i) = (1.0 - w) * c_.row(i) + w * d_.row(i);
            }
        }
        return m;
    }

private:
    Matrix c_;
    Matrix d_;
    Vector e_;
};

class ProjectedField final : public VectorField {
public:
    ProjectedField(std::shared_ptr<const AmbientMap> y, std::optional<ManifoldPoint> solution)
        : y_(std::move(y)),
          kind_(ManifoldKind::sphere(y_->dimension() - 1)),
          solution_(std::move(solution)) {
        if (y_->dimension() < 2) {
            throw ContractError("projected_field: ambient dimension must be >= 2");
        }
        if (solution_ && !(solution_->kind() == kind_)) {
            throw ContractError("projected_field: solution lives on the wrong manifold");
        }
    }

    ManifoldKind manifold() const override { return kind_; }

    TangentVector eval(const ManifoldPoint& p) const override {
        const Vector& x = p.coords();
        const Vector y = y_->eval(x);
        return TangentVector(p, y - x.dot(y) * x);
    }

    TangentMap clarke_element(const ManifoldPoint& p, const SelectionRule& rule) const override {
        const Vector& x = p.coords();
        const Matrix vy = y_->clarke_element(x, rule);
        const TangentBasis basis = tangent_basis(p);
        // B^T (I - p p^T) Vy B - (p.Y) I = B^T Vy B - (p.Y) I since B^T p = 0.
        Matrix m = basis.matrix().transpose() * vy * basis.matrix();
        m.diagonal().array() -= x.dot(y_->eval(x));
        return TangentMap(p, std::move(m));
    }

    std::optional<ManifoldPoint> exact_solution() const override { return solution_; }

private:
    std::shared_ptr<const AmbientMap> y_;
    ManifoldKind kind_;
    std::optional<ManifoldPoint> solution_;
};

class EuclideanField final : public VectorField {
public:
    EuclideanField(std::shared_ptr<const AmbientMap> y, std::optional<ManifoldPoint> solution)
        : y_(std::move(y)),
          kind_(ManifoldKind::euclidean(y_->dimension())),
          solution_(std::move(solution)) {
        if (solution_ && !(solution_->kind() == kind_)) {
            throw ContractError("euclidean_field: solution lives on the wrong manifold");
        }
    }

    ManifoldKind manifold() const override { return kind_; }

    TangentVector eval(const ManifoldPoint& p) const override {
        return TangentVector(p, y_->eval(p.coords()));
    }

    TangentMap clarke_element(const ManifoldPoint& p, const SelectionRule& rule) const override {
        return TangentMap(p, y_->clarke_element(p.coords(), rule));
    }

    std::optional<ManifoldPoint> exact_solution() const override { return solution_; }

private:
    std::shared_ptr<const AmbientMap> y_;
    ManifoldKind kind_;
    std::optional<ManifoldPoint> solution_;
};

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

std::vector<BatteryEntry> build_battery() {
    std::vector<BatteryEntry> battery;

    {
        Matrix a = Matrix::Zero(2, 2);
        a.diagonal() << 4.0, 3.0;
        auto field = projected_field(
            abs_field(a, vec2(0.0, 2.0)),
            ManifoldPoint(ManifoldKind::sphere(1), vec2(0.0, 1.0)));
        battery.push_back({"example51", std::move(field), 1.0,
                           "b chosen so the ambient map vanishes at (0,1); the kink of |p_1| "
                           "is active there"});
    }
    {
        Matrix a(3, 3);
        a << 3.0, 0.7, 0.2,
             0.7, 4.0, -0.3,
             0.2, -0.3, 2.0;
        Vector b(3);
        b << 0.2, -0.3, 1.0; // A p* - p*
        Vector star(3);
        star << 0.0, 0.0, 1.0;
        auto field = projected_field(linear_field(a, b),
                                     ManifoldPoint(ManifoldKind::sphere(2), star));
        battery.push_back({"smooth-proj", std::move(field), 1.0,
                           "b = A p* - p*, so the ambient map equals p* at p* and projects "
                           "to zero"});
    }
    {
        Matrix c(3, 3);
        c << 3.0, 0.0, 1.0,
             0.0, 4.0, 2.0,
             1.0, 1.0, 5.0;
        Matrix d(3, 3);
        d << 2.0, 0.0, 1.0,
             0.0, 1.0, 1.0,
            -1.0, 1.0, 5.0;
        Vector e(3);
        e << 1.0, 2.0, 5.0;
        Vector star(3);
        star << 0.0, 0.0, 1.0;
        auto field = projected_field(max_affine_field(c, d, e),
                                     ManifoldPoint(ManifoldKind::sphere(2), star));
        battery.push_back({"maxcomp-s2", std::move(field), 1.0,
                           "e_i = max(c_i.p*, d_i.p*) plants the root at p*; rows 1 and 3 "
                           "tie there, so their kinks are active"});
    }
    {
        Matrix a = Matrix::Zero(2, 2);
        a.diagonal() << 4.0, 3.0;
        auto field = euclidean_field(
            abs_field(a, vec2(0.0, 2.0)),
            ManifoldPoint(ManifoldKind::euclidean(2), vec2(0.0, 1.0)));
        battery.push_back({"abs-flat", std::move(field), 1.0,
                           "orthant enumeration of A x - |x| = b gives the unique root (0,1), "
                           "on the kink x_1 = 0"});
    }
    return battery;
}

} // namespace

double SelectionRule::kink_weight(const Vector& point, int component) const {
    switch (kind) {
        case Kind::Midpoint:
            return 0.5;
        case Kind::LowerEndpoint:
            return 0.0;
        case Kind::UpperEndpoint:
            return 1.0;
        case Kind::RandomVertex: {
            std::uint64_t h = 1469598103934665603ull;
            h = fnv1a(h, &seed, sizeof(seed));
            h = fnv1a(h, point.data(), sizeof(double) * point.size());
            h = fnv1a(h, &component, sizeof(component));
            return (h & 1u) ? 1.0 : 0.0;
        }
    }
    return 0.5;
}

std::shared_ptr<AmbientMap> abs_field(Matrix a, Vector b) {
    return std::make_shared<AbsField>(std::move(a), std::move(b));
}

std::shared_ptr<AmbientMap> linear_field(Matrix a, Vector b) {
    return std::make_shared<LinearField>(std::move(a), std::move(b));
}

std::shared_ptr<AmbientMap> max_affine_field(Matrix c, Matrix d, Vector e) {
    return std::make_shared<MaxAffineField>(std::move(c), std::move(d), std::move(e));
}

std::shared_ptr<VectorField> projected_field(std::shared_ptr<const AmbientMap> y,
                                             std::optional<ManifoldPoint> solution) {
    return std::make_shared<ProjectedField>(std::move(y), std::move(solution));
}

std::shared_ptr<VectorField> euclidean_field(std::shared_ptr<const AmbientMap> y,
                                             std::optional<ManifoldPoint> solution) {
    return std::make_shared<EuclideanField>(std::move(y), std::move(solution));
}

const std::vector<BatteryEntry>& test_battery() {
    static const std::vector<BatteryEntry> battery = build_battery();
    return battery;
}

const BatteryEntry* find_battery_field(std::string_view id) {
    for (const auto& entry : test_battery()) {
        if (entry.id == id) {
            return &entry;
        }
    }
    return nullptr;
}

} // namespace ssn
