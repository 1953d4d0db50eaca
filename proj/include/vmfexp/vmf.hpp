#pragma once

#include <span>

#include "vmfexp/random.hpp"
#include "vmfexp/sphere.hpp"

namespace vmfexp {

/// Law of t = <V, X> for X ~ vMF(V, kappa) on S^{d-1}.
class RadialLaw {
public:
    RadialLaw(double kappa, int d);

    double kappa() const { return kappa_; }
    int d() const { return d_; }

    /// ln f_radial(t). +inf at t = +-1 when d = 2.
    double log_pdf(double t) const;

    /// F_radial(t) by adaptive quadrature, absolute error about 1e-12.
    double cdf(double t) const;

    /// 1 - F_radial(t), without cancellation for t near 1.
    double survival(double t) const;

    /// Wood's rejection sampler; exact beta transform at kappa = 0.
    double sample(RandomSource& rng) const;

    /// E[t] by quadrature.
    double mean() const;

private:
    double tail_integral(double phi_lo, double phi_hi) const;

    double kappa_;
    int d_;
    double log_norm_;
    double wood_b_ = 0.0;
    double wood_x0_ = 0.0;
    double wood_c_ = 0.0;
};

struct VmfParams {
    VmfParams(UnitVector mean_direction, double kappa);

    int d() const { return mean_direction.dim(); }

    UnitVector mean_direction;
    double kappa;
    RadialLaw radial;
    double log_normalizer;
};

/// ln C_d(kappa) + kappa <V, x>.
double log_density(const VmfParams& params, const UnitVector& x);
double log_density(const VmfParams& params, std::span<const double> x);

double radial_log_pdf(const RadialLaw& law, double t);
double radial_cdf(const RadialLaw& law, double t);
double sample_radial(const RadialLaw& law, RandomSource& rng);

/// Radial draw composed with a uniform tangent; cost independent of any action set.
UnitVector sample(const VmfParams& params, RandomSource& rng);

/// Banerjee et al. closed form: R(d - R^2) / (1 - R^2), R the mean resultant length.
double estimate_kappa(std::span<const UnitVector> samples);

}  // namespace vmfexp
