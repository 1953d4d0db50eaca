#include "vmfexp/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "vmfexp/errors.hpp"

namespace vmfexp {

ProbabilityEstimate ProbabilityEstimate::from_counts(std::uint64_t hits, std::uint64_t trials) {
    if (trials == 0) throw DomainError("estimate: zero trials");
    if (hits > trials) throw DomainError("estimate: more hits than trials");
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

ProbabilityEstimate ProbabilityEstimate::from_moments(double mean, double variance,
                                                      std::uint64_t count) {
    if (count == 0) throw DomainError("estimate: zero trials");
    const double p = std::clamp(mean, 0.0, 1.0);
    return {p, 1.96 * std::sqrt(std::max(variance, 0.0) / static_cast<double>(count)), count};
}

void RunningMoments::add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(count_ + other.count_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.count_) / total;
    m2_ += other.m2_ + delta * delta * static_cast<double>(count_) * static_cast<double>(other.count_) / total;
    count_ += other.count_;
}

double RunningMoments::variance() const {
    return count_ < 2 ? 0.0 : m2_ / static_cast<double>(count_ - 1);
}

ProbabilityEstimate RunningMoments::estimate() const {
    return ProbabilityEstimate::from_moments(mean_, variance(), count_);
}

ProbabilityEstimate from_clustered_counts(std::uint64_t hits, std::uint64_t trials,
                                          const RunningMoments& cluster_fractions) {
    ProbabilityEstimate est = ProbabilityEstimate::from_counts(hits, trials);
    const std::uint64_t clusters = cluster_fractions.count();
    if (clusters >= 2) {
        const double between =
            1.96 * std::sqrt(cluster_fractions.variance() / static_cast<double>(clusters));
        est.half_width_95 = std::max(est.half_width_95, between);
    }
    return est;
}

}  // namespace vmfexp
