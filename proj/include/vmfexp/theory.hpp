#pragma once

#include <cstdint>

#include "vmfexp/estimate.hpp"
#include "vmfexp/random.hpp"

namespace vmfexp {

/// n i.i.d. uniform actions plus a distinguished action A, state V, and <V, A>.
struct AsymptoticInput {
    std::uint64_t n = 1;
    int d = 2;
    double kappa = 0.0;
    double dot_va = 0.0;
};

/// Leading-order selection probability f_vMF(A | V, kappa) |S^{d-1}| / n, shared by B-exp and vMF-exp.
double p0(const AsymptoticInput& in);

/// First-order correction for vMF-exp (d >= 3):
/// p0 (1 - kappa <V,A> G((d+1)/(d-1))/2 ((d-1) B(1/2, (d-1)/2) / n)^{2/(d-1)}).
double p1(const AsymptoticInput& in);

/// Leading-order E[max_i <V, X_i>] over n uniform points, d >= 3.
double expected_max_dot(std::uint64_t n, int d);

/// Circle case (d = 2): probability that vMF-exp picks the action at angle theta0 from V
/// when the other n actions are uniform on the circle.
///
/// Each trial draws the nearest angular neighbors on both sides of A, then integrates the
/// von Mises density over A's arc. The arc-length part has a known mean and is added
/// back exactly, so the Monte Carlo noise only comes from the curvature of the density.
ProbabilityEstimate exact_2d_vmf_prob(double kappa, double theta0, std::uint64_t n,
                                      std::uint64_t trials, RandomSource& rng);

}  // namespace vmfexp
