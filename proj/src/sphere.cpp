#include "vmfexp/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vmfexp/errors.hpp"

namespace vmfexp {

namespace {

void require_same_dim(const UnitVector& a, const UnitVector& b, const char* where) {
    if (a.dim() != b.dim()) {
        throw DomainError(std::string(where) + ": dimension mismatch (" + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()) + ")");
    }
}

}  // namespace

UnitVector::UnitVector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw DomainError("UnitVector: dimension must be >= 2");
    double norm2 = 0.0;
    for (double c : coords_) {
        if (!std::isfinite(c)) throw DomainError("UnitVector: non-finite coordinate");
        norm2 += c * c;
    }
    if (norm2 == 0.0) throw DomainError("UnitVector: zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& c : coords_) c *= inv;
}

UnitVector UnitVector::basis(int d, int axis) {
    if (axis < 0 || axis >= d) throw DomainError("UnitVector::basis: axis out of range");
    std::vector<double> c(static_cast<std::size_t>(std::max(d, 0)), 0.0);
    c[static_cast<std::size_t>(axis)] = 1.0;
    return UnitVector(std::move(c));
}

UnitVector UnitVector::operator-() const {
    std::vector<double> c(coords_);
    for (double& x : c) x = -x;
    return UnitVector(std::move(c));
}

double dot(const UnitVector& a, const UnitVector& b) {
    require_same_dim(a, b, "dot");
    return dot(a.coords(), b.coords());
}

UnitVector sample_uniform_sphere(int d, RandomSource& rng) {
    if (d < 2) throw DomainError("sample_uniform_sphere: d must be >= 2");
    std::vector<double> c(static_cast<std::size_t>(d));
    for (;;) {
        double norm2 = 0.0;
        for (double& x : c) {
            x = rng.normal();
            norm2 += x * x;
        }
        if (norm2 > 1e-300) return UnitVector(std::move(c));
    }
}

double sample_uniform_radial(int d, RandomSource& rng) {
    if (d < 2) throw DomainError("sample_uniform_radial: d must be >= 2");
    // First coordinate of a uniform point, from its 2D marginal: radius then angle.
    const double angle = std::cos(2.0 * std::numbers::pi * rng.uniform());
    if (d == 2) return angle;
    const double u = rng.uniform_open();
    const double r = std::sqrt(-std::expm1(std::log(u) * 2.0 / (d - 2)));
    return r * angle;
}

UnitVector tangent_component(const UnitVector& v, const UnitVector& u) {
    require_same_dim(v, u, "tangent_component");
    const double proj = dot(v, u);
    std::vector<double> c(u.coords().begin(), u.coords().end());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] -= proj * v[i];
        norm2 += c[i] * c[i];
    }
    if (std::sqrt(norm2) <= 1e-12) {
        throw DegenerateTangentError("tangent_component: u is parallel to v");
    }
    // A second Gram-Schmidt pass keeps <result, v> at rounding level.
    const double again = dot(std::span<const double>(c), v.coords());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= again * v[i];
    return UnitVector(std::move(c));
}

UnitVector sample_tangent(const UnitVector& v, RandomSource& rng) {
    for (;;) {
        try {
            return tangent_component(v, sample_uniform_sphere(v.dim(), rng));
        } catch (const DegenerateTangentError&) {
        }
    }
}

UnitVector compose_radial_tangent(const UnitVector& v, double t, const UnitVector& tangent) {
    require_same_dim(v, tangent, "compose_radial_tangent");
    if (!(t >= -1.0 && t <= 1.0)) throw DomainError("compose_radial_tangent: |t| > 1");
    if (std::abs(dot(v, tangent)) > 1e-8) {
        throw DomainError("compose_radial_tangent: tangent is not orthogonal to v");
    }
    const double s = std::sqrt((1.0 - t) * (1.0 + t));
    std::vector<double> c(static_cast<std::size_t>(v.dim()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = t * v[i] + s * tangent[i];
    return UnitVector(std::move(c));
}

}  // namespace vmfexp
