#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vmfexp/random.hpp"

namespace vmfexp {

/// A point on S^{d-1}. Coordinates are renormalized on construction and never change.
class UnitVector {
public:
    /// Throws DomainError for d < 2, non-finite entries or a zero vector.
    explicit UnitVector(std::vector<double> coords);

    static UnitVector basis(int d, int axis);

    int dim() const { return static_cast<int>(coords_.size()); }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const { return coords_; }

    UnitVector operator-() const;

private:
    std::vector<double> coords_;
};

/// Plain dot product; no dimension check. Four partial sums, so long rows are not
/// serialized on one add chain.
inline double dot(std::span<const double> a, std::span<const double> b) {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= a.size(); i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < a.size(); ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

/// Inner product; DomainError on dimension mismatch.
double dot(const UnitVector& a, const UnitVector& b);

UnitVector sample_uniform_sphere(int d, RandomSource& rng);

/// <V, X> for X uniform on S^{d-1}: exact transform of two uniforms, no rejection.
double sample_uniform_radial(int d, RandomSource& rng);

/// Normalized part of u orthogonal to v. DegenerateTangentError when u is parallel to v.
UnitVector tangent_component(const UnitVector& v, const UnitVector& u);

/// Uniform direction in the tangent space at v (resamples on the degenerate case).
UnitVector sample_tangent(const UnitVector& v, RandomSource& rng);

/// t v + sqrt(1 - t^2) tangent.
UnitVector compose_radial_tangent(const UnitVector& v, double t, const UnitVector& tangent);

}  // namespace vmfexp
