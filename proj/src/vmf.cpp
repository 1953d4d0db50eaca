#include "vmfexp/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "vmfexp/errors.hpp"
#include "vmfexp/quadrature.hpp"
#include "vmfexp/specfn.hpp"

namespace vmfexp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_law_args(double kappa, int d) {
    if (d < 2) throw DomainError("vmf: d must be >= 2");
    if (!std::isfinite(kappa) || kappa < 0.0) throw DomainError("vmf: kappa must be finite and >= 0");
}

void check_t(double t) {
    if (!(t >= -1.0 && t <= 1.0)) throw DomainError("radial law: t must lie in [-1, 1]");
}

}  // namespace

RadialLaw::RadialLaw(double kappa, int d) : kappa_(kappa), d_(d) {
    check_law_args(kappa, d);
    const double nu = 0.5 * d - 1.0;
    log_norm_ = -specfn::log_bessel_i_scaled(nu, kappa) - specfn::log_gamma(0.5) -
                specfn::log_gamma(0.5 * (d - 1));
    if (kappa > 0.0) {
        const double dm1 = d - 1.0;
        wood_b_ = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
        wood_x0_ = (1.0 - wood_b_) / (1.0 + wood_b_);
        wood_c_ = kappa * wood_x0_ + dm1 * (std::log(4.0 * wood_b_) - 2.0 * std::log1p(wood_b_));
    }
}

double RadialLaw::log_pdf(double t) const {
    check_t(t);
    const double one_minus_t2 = (1.0 - t) * (1.0 + t);
    if (d_ == 3) return log_norm_ + kappa_ * t;
    if (one_minus_t2 == 0.0) return d_ == 2 ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity();
    return log_norm_ + kappa_ * t + 0.5 * (d_ - 3) * std::log(one_minus_t2);
}

// Integral of f_radial over t = cos(phi), phi in [phi_lo, phi_hi]. The substitution
// removes the endpoint singularity at d = 2.
double RadialLaw::tail_integral(double phi_lo, double phi_hi) const {
    if (phi_hi <= phi_lo) return 0.0;
    const double power = d_ - 2.0;
    auto g = [&](double phi) {
        double e = log_norm_ + kappa_ * std::cos(phi);
        if (d_ > 2) {
            const double s = std::sin(phi);
            if (s <= 0.0) return 0.0;
            e += power * std::log(s);
        }
        return std::exp(e);
    };
    // Mode of the integrand in phi, and a width scale around it.
    double mode = 0.5 * kPi;
    if (kappa_ > 0.0) {
        const double c = 2.0 * kappa_ / (power + std::sqrt(power * power + 4.0 * kappa_ * kappa_));
        mode = std::acos(std::min(1.0, c));
    }
    const double width = 1.0 / std::sqrt(kappa_ + d_);
    std::vector<double> breaks{mode};
    for (double k : {1.0, 3.0, 8.0}) {
        breaks.push_back(mode - k * width);
        breaks.push_back(mode + k * width);
    }
    return quad::integrate(g, phi_lo, phi_hi, 1e-14, 1e-13, breaks).value;
}

double RadialLaw::cdf(double t) const {
    check_t(t);
    if (t == -1.0) return 0.0;
    if (t == 1.0) return 1.0;
    const double phi = std::acos(t);
    if (t <= 0.0) return std::clamp(tail_integral(phi, kPi), 0.0, 1.0);
    return std::clamp(1.0 - tail_integral(0.0, phi), 0.0, 1.0);
}

double RadialLaw::survival(double t) const {
    check_t(t);
    if (t == -1.0) return 1.0;
    if (t == 1.0) return 0.0;
    const double phi = std::acos(t);
    if (t >= 0.0) return std::clamp(tail_integral(0.0, phi), 0.0, 1.0);
    return std::clamp(1.0 - tail_integral(phi, kPi), 0.0, 1.0);
}

double RadialLaw::mean() const {
    auto g = [&](double t) { return t * std::exp(log_pdf(t)); };
    if (d_ == 2) {
        // Back to phi to avoid the endpoint singularity.
        auto h = [&](double phi) {
            return std::cos(phi) * std::exp(log_norm_ + kappa_ * std::cos(phi));
        };
        return quad::integrate(h, 0.0, kPi, 1e-14, 1e-13).value;
    }
    return quad::integrate(g, -1.0, 1.0, 1e-14, 1e-13, {0.0, 0.5, 0.9, 0.99}).value;
}

double RadialLaw::sample(RandomSource& rng) const {
    if (kappa_ == 0.0) return sample_uniform_radial(d_, rng);
    const double dm1 = d_ - 1.0;
    for (;;) {
        const double z = 0.5 * (1.0 + sample_uniform_radial(d_, rng));
        const double w = (1.0 - (1.0 + wood_b_) * z) / (1.0 - (1.0 - wood_b_) * z);
        const double u = rng.uniform_open();
        if (kappa_ * w + dm1 * std::log1p(-wood_x0_ * w) - wood_c_ >= std::log(u)) {
            return std::clamp(w, -1.0, 1.0);
        }
    }
}

VmfParams::VmfParams(UnitVector mean_direction_in, double kappa_in)
    : mean_direction(std::move(mean_direction_in)),
      kappa(kappa_in),
      radial(kappa_in, mean_direction.dim()),
      log_normalizer(specfn::log_vmf_normalizer(mean_direction.dim(), kappa_in)) {}

double log_density(const VmfParams& params, const UnitVector& x) {
    return params.log_normalizer + params.kappa * dot(params.mean_direction, x);
}

double log_density(const VmfParams& params, std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.d()) throw DomainError("log_density: dimension mismatch");
    return params.log_normalizer + params.kappa * dot(params.mean_direction.coords(), x);
}

double radial_log_pdf(const RadialLaw& law, double t) { return law.log_pdf(t); }

double radial_cdf(const RadialLaw& law, double t) { return law.cdf(t); }

double sample_radial(const RadialLaw& law, RandomSource& rng) { return law.sample(rng); }

UnitVector sample(const VmfParams& params, RandomSource& rng) {
    const double t = params.radial.sample(rng);
    return compose_radial_tangent(params.mean_direction, t,
                                  sample_tangent(params.mean_direction, rng));
}

double estimate_kappa(std::span<const UnitVector> samples) {
    if (samples.size() < 2) throw DomainError("estimate_kappa: need at least 2 samples");
    const int d = samples.front().dim();
    std::vector<double> sum(static_cast<std::size_t>(d), 0.0);
    for (const auto& x : samples) {
        if (x.dim() != d) throw DomainError("estimate_kappa: dimension mismatch");
        for (int i = 0; i < d; ++i) sum[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
    }
    double norm2 = 0.0;
    for (double s : sum) norm2 += s * s;
    const double r = std::sqrt(norm2) / static_cast<double>(samples.size());
    if (r >= 1.0 - 1e-12) {
        throw ConcentrationOverflowError("estimate_kappa: mean resultant length is 1");
    }
    if (r <= 1e-12) return 0.0;
    return r * (d - r * r) / ((1.0 - r) * (1.0 + r));
}

}  // namespace vmfexp
