#include "vmfexp/theory.hpp"

#include <cmath>
#include <numbers>

#include "vmfexp/errors.hpp"
#include "vmfexp/quadrature.hpp"
#include "vmfexp/specfn.hpp"

namespace vmfexp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_input(const AsymptoticInput& in) {
    if (in.n < 1) throw DomainError("theory: n must be >= 1");
    if (in.d < 2) throw DomainError("theory: d must be >= 2");
    if (!std::isfinite(in.kappa) || in.kappa < 0.0) throw DomainError("theory: kappa must be >= 0");
    if (!(in.dot_va >= -1.0 && in.dot_va <= 1.0)) throw DomainError("theory: <V,A> must lie in [-1, 1]");
}

// G((d+1)/(d-1))/2 ((d-1) B(1/2, (d-1)/2) / n)^{2/(d-1)}
double max_gap(std::uint64_t n, int d) {
    const double dm1 = d - 1.0;
    const double log_inner = std::log(dm1) + specfn::log_beta(0.5, 0.5 * dm1) - std::log(static_cast<double>(n));
    return std::exp(specfn::log_gamma((d + 1.0) / dm1) - std::numbers::ln2 + 2.0 / dm1 * log_inner);
}

}  // namespace

double p0(const AsymptoticInput& in) {
    check_input(in);
    return std::exp(specfn::log_vmf_normalizer(in.d, in.kappa) + in.kappa * in.dot_va +
                    specfn::sphere_surface_area(in.d).log_magnitude - std::log(static_cast<double>(in.n)));
}

double p1(const AsymptoticInput& in) {
    check_input(in);
    if (in.d < 3) throw DomainError("p1: requires d >= 3");
    return p0(in) * (1.0 - in.kappa * in.dot_va * max_gap(in.n, in.d));
}

double expected_max_dot(std::uint64_t n, int d) {
    if (n < 1) throw DomainError("expected_max_dot: n must be >= 1");
    if (d < 3) throw DomainError("expected_max_dot: requires d >= 3");
    return 1.0 - max_gap(n, d);
}

ProbabilityEstimate exact_2d_vmf_prob(double kappa, double theta0, std::uint64_t n,
                                      std::uint64_t trials, RandomSource& rng) {
    if (!std::isfinite(kappa) || kappa < 0.0) throw DomainError("exact_2d_vmf_prob: kappa must be >= 0");
    if (!(theta0 >= -std::numbers::pi && theta0 <= std::numbers::pi)) {
        throw DomainError("exact_2d_vmf_prob: theta0 must lie in [-pi, pi]");
    }
    if (n < 1) throw DomainError("exact_2d_vmf_prob: n must be >= 1");
    if (trials < 1) throw DomainError("exact_2d_vmf_prob: trials must be >= 1");

    const double density_at_a =
        std::exp(kappa * std::cos(theta0) - std::log(kTwoPi) - specfn::log_bessel_i(0.0, kappa));
    // f(theta) - f(theta0), without cancellation for theta near theta0.
    auto excess = [&](double theta) {
        const double dcos = -2.0 * std::sin(0.5 * (theta + theta0)) * std::sin(0.5 * (theta - theta0));
        return density_at_a * std::expm1(kappa * dcos);
    };

    const double nd = static_cast<double>(n);
    RunningMoments moments;
    for (std::uint64_t t = 0; t < trials; ++t) {
        // Smallest and largest of n uniform angles on [0, 2pi), measured from A, drawn jointly.
        const double first = kTwoPi * -std::expm1(std::log(rng.uniform_open()) / nd);
        double last = first;
        if (n > 1) last = first + (kTwoPi - first) * std::exp(std::log(rng.uniform_open()) / (nd - 1.0));
        const double lo = theta0 + 0.5 * (last - kTwoPi);
        const double hi = theta0 + 0.5 * first;
        moments.add(kappa == 0.0 ? 0.0 : quad::integrate(excess, lo, hi, 1e-10, 1e-12).value);
    }
    // E[arc length] = 2 pi / (n + 1).
    const double arc_part = density_at_a * kTwoPi / (nd + 1.0);
    return ProbabilityEstimate::from_moments(moments.mean() + arc_part, moments.variance(), trials);
}

}  // namespace vmfexp
