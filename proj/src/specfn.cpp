#include "vmfexp/specfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "vmfexp/errors.hpp"

namespace vmfexp::specfn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double z, const char* what) {
    if (!std::isfinite(z) || z <= 0.0) {
        throw DomainError(std::string(what) + ": argument must be finite and > 0");
    }
}

// ln sum_m (x^2/4)^m / (m! Gamma(m + nu + 1))
double bessel_series_scaled(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;
    for (int m = 0; m < 100000; ++m) {
        const double denom = (m + 1.0) * (m + 1.0 + nu);
        term *= q / denom;
        sum += term;
        if (sum > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            log_scale += 280.0 * std::numbers::ln10;
        }
        if (denom > q && term < 1e-17 * sum) break;
    }
    return std::log(sum) + log_scale - log_gamma(nu + 1.0);
}

// Hankel: I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k.
// Returns nothing if the asymptotic series never gets below machine precision.
std::optional<double> bessel_hankel_log(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    const double prefix = x - 0.5 * std::log(2.0 * std::numbers::pi * x);
    double term = 1.0;
    double sum = 1.0;
    double largest = 1.0;
    // Rejects sums that lost more than four digits to cancellation.
    auto accept = [&]() -> std::optional<double> {
        if (sum <= 0.0 || largest > 1e4 * sum) return std::nullopt;
        return prefix + std::log(sum);
    };
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * x);
        // Half-integer orders terminate exactly.
        if (next == 0.0) return accept();
        if (std::abs(next) >= std::abs(term) && odd * odd > mu) return std::nullopt;
        term = next;
        sum += term;
        largest = std::max(largest, std::abs(term));
        if (largest > 1e20) return std::nullopt;
        if (std::abs(term) < 1e-17 * std::abs(sum)) return accept();
    }
    return std::nullopt;
}

// Debye polynomials u_k(t) from
//   u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2 + (1/8) int_0^t (1 - 5 s^2) u_k(s) ds.
// Coefficients indexed by power of t.
const std::vector<std::vector<double>>& debye_polynomials() {
    static const std::vector<std::vector<double>> polys = [] {
        constexpr int kTerms = 13;
        std::vector<std::vector<double>> u(kTerms);
        u[0] = {1.0};
        for (int k = 0; k + 1 < kTerms; ++k) {
            const auto& p = u[k];
            std::vector<double> next(p.size() + 3, 0.0);
            for (std::size_t j = 1; j < p.size(); ++j) {
                // (1/2) (t^2 - t^4) * j p_j t^{j-1}
                next[j + 1] += 0.5 * j * p[j];
                next[j + 3] -= 0.5 * j * p[j];
            }
            for (std::size_t j = 0; j < p.size(); ++j) {
                // (1/8) int (p_j s^j - 5 p_j s^{j+2})
                next[j + 1] += p[j] / (8.0 * (j + 1.0));
                next[j + 3] -= 5.0 * p[j] / (8.0 * (j + 3.0));
            }
            u[k + 1] = std::move(next);
        }
        return u;
    }();
    return polys;
}

std::optional<double> bessel_debye_log(double nu, double x) {
    const double z = x / nu;
    const double root = std::sqrt(1.0 + z * z);
    const double t = 1.0 / root;
    const double eta = root + std::log(z / (1.0 + root));
    const auto& polys = debye_polynomials();
    double sum = 0.0;
    double nu_pow = 1.0;
    double prev = kInf;
    for (const auto& poly : polys) {
        double value = 0.0;
        for (std::size_t j = poly.size(); j-- > 0;) value = value * t + poly[j];
        const double term = value / nu_pow;
        if (std::abs(term) > prev) break;
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-17 * std::abs(sum)) break;
        nu_pow *= nu;
    }
    if (prev > 1e-13 * std::abs(sum)) return std::nullopt;
    return nu * eta - 0.5 * std::log(2.0 * std::numbers::pi * nu) - 0.25 * std::log1p(z * z) +
           std::log(sum);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < 20000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// ln(x^a (1-x)^b / B(a,b))
double beta_front_log(double a, double b, double x) {
    return a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
}

void check_beta_args(double a, double b, double x) {
    require_positive(a, "beta_inc");
    require_positive(b, "beta_inc");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("beta_inc: x must lie in [0, 1]");
}

// Lower tail I_x(a,b) and upper tail 1 - I_x(a,b), each computed directly
// on the side where the continued fraction converges.
struct BetaTails {
    double lower;
    double upper;
};

BetaTails beta_tails(double a, double b, double x) {
    if (x == 0.0) return {0.0, 1.0};
    if (x == 1.0) return {1.0, 0.0};
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = std::exp(beta_front_log(a, b, x)) * beta_cf(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(beta_front_log(b, a, 1.0 - x)) * beta_cf(b, a, 1.0 - x) / b;
    return {1.0 - upper, upper};
}

}  // namespace

double log_gamma(double z) {
    require_positive(z, "log_gamma");
    static constexpr std::array<double, 14> kCoefficients = {
        57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
        -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
        -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
        .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
        -.261908384015814087e-4, .368991826595316234e-5};
    double y = z;
    double tmp = z + 5.24218750000000000;  // g = 671/128
    tmp = (z + 0.5) * std::log(tmp) - tmp;
    double ser = 0.999999999999997092;
    for (double c : kCoefficients) ser += c / ++y;
    return tmp + std::log(2.5066282746310005 * ser / z);
}

double log_beta(double z1, double z2) {
    require_positive(z1, "log_beta");
    require_positive(z2, "log_beta");
    return log_gamma(z1) + log_gamma(z2) - log_gamma(z1 + z2);
}

double log_bessel_i_scaled(double nu, double kappa) {
    if (!std::isfinite(nu) || nu < 0.0) throw DomainError("log_bessel_i: nu must be >= 0");
    if (!std::isfinite(kappa) || kappa < 0.0) {
        throw DomainError("log_bessel_i: kappa must be >= 0");
    }
    if (kappa == 0.0) return -log_gamma(nu + 1.0);
    if (kappa <= nu + 20.0) return bessel_series_scaled(nu, kappa);
    auto log_i = bessel_hankel_log(nu, kappa);
    if (!log_i) log_i = bessel_debye_log(nu, kappa);
    // Neither expansion is accurate for moderate nu with kappa a few times nu;
    // the series has only positive terms, so it stays accurate there, just slower.
    if (!log_i) return bessel_series_scaled(nu, kappa);
    return *log_i - nu * std::log(0.5 * kappa);
}

double log_bessel_i(double nu, double kappa) {
    const double scaled = log_bessel_i_scaled(nu, kappa);
    if (kappa == 0.0) return nu == 0.0 ? 0.0 : -kInf;
    return scaled + nu * std::log(0.5 * kappa);
}

LogValue sphere_surface_area(int d) {
    if (d < 2) throw DomainError("sphere_surface_area: d must be >= 2");
    const double half = 0.5 * d;
    return {std::numbers::ln2 + half * std::log(std::numbers::pi) - log_gamma(half)};
}

double log_vmf_normalizer(int d, double kappa) {
    if (d < 2) throw DomainError("log_vmf_normalizer: d must be >= 2");
    if (!std::isfinite(kappa) || kappa < 0.0) {
        throw DomainError("log_vmf_normalizer: kappa must be finite and >= 0");
    }
    if (kappa == 0.0) return -sphere_surface_area(d).log_magnitude;
    const double nu = 0.5 * d - 1.0;
    return nu * std::numbers::ln2 - 0.5 * d * std::log(2.0 * std::numbers::pi) -
           log_bessel_i_scaled(nu, kappa);
}

double beta_inc(double a, double b, double x) {
    check_beta_args(a, b, x);
    return beta_tails(a, b, x).lower;
}

double beta_inc_complement(double a, double b, double x) {
    check_beta_args(a, b, x);
    return beta_tails(a, b, x).upper;
}

double beta_inc_inverse(double a, double b, double p) {
    require_positive(a, "beta_inc_inverse");
    require_positive(b, "beta_inc_inverse");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("beta_inc_inverse: p must lie in [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    if (p > 0.5) return 1.0 - beta_inc_inverse(b, a, 1.0 - p);

    const double log_b = log_beta(a, b);
    const double log_p = std::log(p);
    double x = std::exp((log_p + std::log(a) + log_b) / a);
    if (!(x > 0.0 && x < 1.0)) x = 0.5;
    double lo = 0.0;
    double hi = 1.0;
    for (int iter = 0; iter < 300; ++iter) {
        const double value = beta_tails(a, b, x).lower;
        if (value < p) {
            lo = x;
        } else {
            hi = x;
        }
        const double log_density = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_b;
        // Newton on ln I_x - ln p
        const double step = (std::log(value) - log_p) * value / std::exp(log_density);
        double next = x - step;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        }
        if (std::abs(next - x) <= 1e-15 * x) return next;
        x = next;
        if (hi - lo <= 1e-16 * hi) return x;
    }
    return x;
}

}  // namespace vmfexp::specfn
