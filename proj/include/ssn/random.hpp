#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ssn/geometry.hpp"

namespace ssn {

/// Seeded sampler used by every estimator. Variates are derived from raw
/// mt19937_64 output so the same seed yields the same stream on every
/// standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vector gaussian_vector(int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = gaussian();
        return v;
    }

    Vector unit_vector(int n) {
        Vector v = gaussian_vector(n);
        double norm = v.norm();
        while (norm < 1e-8) {
            v = gaussian_vector(n);
            norm = v.norm();
        }
        return v / norm;
    }

private:
    std::mt19937_64 engine_;
};

/// Unit tangent vector at p with basis coordinates uniform on the unit sphere
/// of R^n.
inline TangentVector random_unit_tangent(Rng& rng, const ManifoldPoint& p) {
    const TangentBasis basis = tangent_basis(p);
    return basis.from_coords(rng.unit_vector(p.kind().dimension()));
}

/// Point at geodesic distance exactly r from center, random direction.
inline ManifoldPoint random_point_at_distance(Rng& rng, const ManifoldPoint& center,
                                              double r) {
    return exp_map(center, r * random_unit_tangent(rng, center));
}

/// Point in the closed geodesic ball of the given radius around center.
inline ManifoldPoint random_point_in_ball(Rng& rng, const ManifoldPoint& center,
                                          double radius) {
    return random_point_at_distance(rng, center, radius * rng.uniform());
}

} // namespace ssn
