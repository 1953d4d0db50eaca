#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vmfexp/estimate.hpp"
#include "vmfexp/random.hpp"
#include "vmfexp/sphere.hpp"

namespace vmfexp {

/// How P_vMF-exp(a) is estimated.
///
/// direct: materialize `resample_sets` uniform sets plus the anchor, draw vMF-exp
/// through the exact index, count hits on the anchor.
///
/// cell: draw the query from the anchor's expected Voronoi cell instead. With
/// s = <V~, A>, the chance that all n uniform actions lose to A is F(s)^n, F the
/// uniform radial CDF. Sampling s with density proportional to F(s)^n and weighting
/// by the vMF density gives an unbiased per-draw value |S^{d-1}| f(V~) / (n + 1)
/// with no nearest-neighbor search.
enum class VmfEstimator { direct, cell };

/// How P_B-exp(a) is estimated. Both average the exact softmax mass of the anchor.
///
/// radial: only the n inner products with V matter; draw them directly.
/// materialized: build the vectors and go through the policy layer.
enum class BoltzmannEstimator { radial, materialized };

struct ExperimentSpec {
    int d = 2;
    double kappa = 0.0;
    double dot_va = 0.0;
    std::vector<std::uint64_t> n_grid = {1000, 3000, 10000, 30000, 100000};
    std::uint64_t trials = 8'000'000;      // vMF-exp draws per grid point
    std::uint64_t resample_sets = 200'000;  // fresh uniform sets per grid point
    std::uint64_t seed = 0;
    unsigned workers = 1;
    VmfEstimator vmf_estimator = VmfEstimator::cell;
    BoltzmannEstimator boltzmann_estimator = BoltzmannEstimator::radial;

    /// DomainError on any out-of-range field.
    void validate() const;
};

/// Uniform V and an A with <V, A> = dot_va.
std::pair<UnitVector, UnitVector> place_anchor_pair(int d, double dot_va, RandomSource& rng);

ProbabilityEstimate estimate_vmf_prob(const ExperimentSpec& spec, std::uint64_t n);
ProbabilityEstimate estimate_boltzmann_prob(const ExperimentSpec& spec, std::uint64_t n);

struct GridRow {
    std::uint64_t n;
    ProbabilityEstimate p_vmf;
    ProbabilityEstimate p_boltz;
    double p0;
    std::optional<double> p1;  // d >= 3 only
};

/// One row per n in the grid. Independent of `workers`.
std::vector<GridRow> run_grid(const ExperimentSpec& spec);

}  // namespace vmfexp
