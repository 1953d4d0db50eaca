// Built with -ffast-math so the transcendental loops map onto vector math routines.
#include "radial_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "vmfexp/random.hpp"

namespace vmfexp::detail {

namespace {

constexpr int kLanes = 8;
constexpr int kBlock = 1024;

struct LaneGenerator {
    std::uint64_t s0[kLanes], s1[kLanes], s2[kLanes], s3[kLanes];

    explicit LaneGenerator(std::uint64_t key) {
        for (int j = 0; j < kLanes; ++j) {
            std::uint64_t x = mix64(key + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(j + 1));
            s0[j] = x = mix64(x);
            s1[j] = x = mix64(x);
            s2[j] = x = mix64(x);
            s3[j] = mix64(x) | 1;
        }
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    void next(std::uint64_t* out) {
        for (int j = 0; j < kLanes; ++j) {
            out[j] = rotl(s0[j] + s3[j], 23) + s0[j];
            const std::uint64_t t = s1[j] << 17;
            s2[j] ^= s0[j];
            s3[j] ^= s1[j];
            s1[j] ^= s2[j];
            s0[j] ^= s3[j];
            s2[j] ^= t;
            s3[j] = rotl(s3[j], 45);
        }
    }
};

// sin(pi x) on [-1/2, 1/2]; Taylor to x^19, error below 3e-16.
constexpr double kSinPi[10] = {
    3.141592653589793, -5.167712780049969, 2.550164039877345, -0.5992645293207919,
    0.08214588661112819, -0.007370430945714348, 0.00046630280576761234, -2.1915353447830204e-05,
    7.952054001475508e-07, -2.2948428997269856e-08};

// Fills t with <V, X> draws: sqrt(1 - u^{2/(d-2)}) cos(angle) for d >= 3, cos(angle) for d = 2.
void fill_block(LaneGenerator& gen, int d, double* t) {
    alignas(64) double u[kBlock];
    alignas(64) double w[kBlock];
    alignas(64) std::uint64_t a[kLanes];
    alignas(64) std::uint64_t b[kLanes];
    for (int i = 0; i < kBlock; i += kLanes) {
        gen.next(a);
        gen.next(b);
        for (int j = 0; j < kLanes; ++j) {
            u[i + j] = (static_cast<double>(a[j] >> 11) + 0.5) * 0x1.0p-53;
            w[i + j] = static_cast<double>(b[j] >> 11) * 0x1.0p-53 - 0.5;
        }
    }
    for (int i = 0; i < kBlock; ++i) {
        const double z = w[i] * w[i];
        double p = kSinPi[9];
        for (int k = 8; k >= 0; --k) p = p * z + kSinPi[k];
        t[i] = w[i] * p;
    }
    if (d == 2) return;
    if (d == 3) {
        for (int i = 0; i < kBlock; ++i) t[i] *= std::sqrt(1.0 - u[i] * u[i]);
    } else if (d == 4) {
        for (int i = 0; i < kBlock; ++i) t[i] *= std::sqrt(1.0 - u[i]);
    } else {
        const double e = 2.0 / (d - 2.0);
        for (int i = 0; i < kBlock; ++i) t[i] *= std::sqrt(1.0 - std::exp(std::log(u[i]) * e));
    }
}

}  // namespace

double log_sum_exp_uniform_radial(int d, double kappa, std::uint64_t n, std::uint64_t key) {
    LaneGenerator gen(key);
    alignas(64) double t[kBlock];
    double run_log_max = 0.0;
    double run_sum = 0.0;
    for (std::uint64_t done = 0; done < n;) {
        fill_block(gen, d, t);
        const int m = static_cast<int>(std::min<std::uint64_t>(kBlock, n - done));
        double top = -2.0;
        for (int i = 0; i < m; ++i) top = std::max(top, t[i]);
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += std::exp(kappa * (t[i] - top));
        const double log_max = kappa * top;
        if (done == 0) {
            run_log_max = log_max;
            run_sum = sum;
        } else if (log_max > run_log_max) {
            run_sum = run_sum * std::exp(run_log_max - log_max) + sum;
            run_log_max = log_max;
        } else {
            run_sum += sum * std::exp(log_max - run_log_max);
        }
        done += static_cast<std::uint64_t>(m);
    }
    return run_log_max + std::log(run_sum);
}

}  // namespace vmfexp::detail
