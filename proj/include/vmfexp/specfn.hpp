#pragma once

#include <cmath>

namespace vmfexp {

/// A positive quantity carried as its natural logarithm.
struct LogValue {
    double log_magnitude = 0.0;

    double value() const { return std::exp(log_magnitude); }
};

namespace specfn {

/// ln Gamma(z) for z > 0 (Lanczos, 14 terms).
double log_gamma(double z);

/// ln B(z1, z2) = lnG(z1) + lnG(z2) - lnG(z1 + z2).
double log_beta(double z1, double z2);

/// ln I_nu(kappa), the modified Bessel function of the first kind.
///
/// Ascending series for kappa <= nu + 20. Above that, Hankel's large-argument
/// expansion when it converges to machine precision, otherwise Debye's uniform
/// expansion in nu. Returns -inf at kappa == 0 for nu > 0.
double log_bessel_i(double nu, double kappa);

/// ln(I_nu(kappa) / (kappa/2)^nu). Finite and continuous at kappa = 0, where it
/// equals -lnG(nu + 1). This is the form the vMF normalizers are built from.
double log_bessel_i_scaled(double nu, double kappa);

/// ln of the surface area of S^{d-1}: ln 2 + (d/2) ln pi - lnG(d/2).
LogValue sphere_surface_area(int d);

/// ln C_d(kappa) for the vMF density C_d(kappa) e^{kappa <V, x>} on S^{d-1}.
double log_vmf_normalizer(int d, double kappa);

/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

/// 1 - I_x(a, b), evaluated without cancellation near x = 1.
double beta_inc_complement(double a, double b, double x);

/// Solves I_x(a, b) = p for x in [0, 1]. Accurate for p down to ~1e-300.
double beta_inc_inverse(double a, double b, double p);

}  // namespace specfn
}  // namespace vmfexp
