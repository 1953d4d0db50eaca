#pragma once

#include <cstdint>

namespace vmfexp {

/// A Monte Carlo probability with its 95% half-width.
struct ProbabilityEstimate {
    double p_hat = 0.0;
    double half_width_95 = 0.0;
    std::uint64_t trials_total = 0;

    double lower() const { return p_hat - half_width_95; }
    double upper() const { return p_hat + half_width_95; }
    bool overlaps(const ProbabilityEstimate& other) const {
        return lower() <= other.upper() && other.lower() <= upper();
    }
    bool covers(double value) const { return lower() <= value && value <= upper(); }

    /// Binomial interval: 1.96 sqrt(p(1 - p) / trials).
    static ProbabilityEstimate from_counts(std::uint64_t hits, std::uint64_t trials);

    /// Mean of per-trial values with a CLT interval from their sample variance.
    static ProbabilityEstimate from_moments(double mean, double variance, std::uint64_t count);
};

/// Welford accumulator; merging is order dependent, so callers fix the order.
class RunningMoments {
public:
    void add(double x);
    void merge(const RunningMoments& other);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance (0 for fewer than two values).
    double variance() const;

    ProbabilityEstimate estimate() const;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Hit frequency over draws grouped in clusters that share one random action set.
/// `cluster_fractions` holds each cluster's hit fraction. The half-width is the larger
/// of the binomial one and the between-cluster one, since draws within a cluster are
/// correlated through the shared set.
ProbabilityEstimate from_clustered_counts(std::uint64_t hits, std::uint64_t trials,
                                          const RunningMoments& cluster_fractions);

}  // namespace vmfexp
