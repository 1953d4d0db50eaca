#include "vmfexp/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <numbers>

#include "radial_kernel.hpp"
#include "vmfexp/embedding.hpp"
#include "vmfexp/errors.hpp"
#include "vmfexp/index.hpp"
#include "vmfexp/parallel.hpp"
#include "vmfexp/policy.hpp"
#include "vmfexp/specfn.hpp"
#include "vmfexp/theory.hpp"
#include "vmfexp/vmf.hpp"

namespace vmfexp {

namespace {

// Stream tags so the estimators never share random numbers.
constexpr std::uint64_t kTagCell = 0xce11;
constexpr std::uint64_t kTagDirect = 0xd1ec;
constexpr std::uint64_t kTagRadial = 0xb01d;
constexpr std::uint64_t kTagMaterialized = 0xb0de;

constexpr std::uint64_t kCellBlock = 1 << 16;
constexpr std::uint64_t kSetBlock = 64;
constexpr std::uint64_t kQueryBatch = 1024;

// Runs fn(block) for every block and merges in block order.
template <class Fn>
RunningMoments reduce_blocks(std::uint64_t blocks, unsigned workers, Fn fn) {
    RunningMoments total;
    for (const auto& part : parallel_map<RunningMoments>(blocks, workers, fn)) total.merge(part);
    return total;
}

void check_n(std::uint64_t n) {
    if (n < 1) throw DomainError("montecarlo: n must be >= 1");
}

// n uniform rows followed by the anchor, ids 0..n.
std::shared_ptr<const EmbeddingSet> anchored_set(int d, std::uint64_t n, const UnitVector& anchor,
                                                 RandomSource& rng) {
    const auto dd = static_cast<std::size_t>(d);
    std::vector<double> rows;
    rows.reserve((n + 1) * dd);
    for (std::uint64_t i = 0; i < n; ++i) {
        const UnitVector x = sample_uniform_sphere(d, rng);
        rows.insert(rows.end(), x.coords().begin(), x.coords().end());
    }
    rows.insert(rows.end(), anchor.coords().begin(), anchor.coords().end());
    std::vector<ActionId> ids(n + 1);
    for (std::uint64_t i = 0; i <= n; ++i) ids[i] = i;
    return std::make_shared<const EmbeddingSet>(d, std::move(rows), std::move(ids));
}

class CellSampler {
public:
    CellSampler(const ExperimentSpec& spec, std::uint64_t n)
        : d_(spec.d),
          kappa_(spec.kappa),
          dot_(spec.dot_va),
          perp_(std::sqrt(std::max(0.0, 1.0 - spec.dot_va * spec.dot_va))),
          half_(0.5 * (spec.d - 1)),
          inv_np1_(1.0 / (static_cast<double>(n) + 1.0)),
          log_scale_(specfn::sphere_surface_area(spec.d).log_magnitude +
                     specfn::log_vmf_normalizer(spec.d, spec.kappa) -
                     std::log(static_cast<double>(n) + 1.0)) {}

    double draw(RandomSource& rng) const {
        // q = 1 - F(s), F(s) ~ Beta(n + 1, 1)
        const double q = -std::expm1(std::log(rng.uniform_open()) * inv_np1_);
        double s;
        double r;
        if (d_ == 2) {
            s = std::cos(std::numbers::pi * q);
            r = std::sin(std::numbers::pi * q);
        } else if (d_ == 3) {
            s = 1.0 - 2.0 * q;
            r = 2.0 * std::sqrt(q * (1.0 - q));
        } else {
            // (1 - s)/2 = y with I_y(a, a) = q
            const double y = specfn::beta_inc_inverse(half_, half_, q);
            s = 1.0 - 2.0 * y;
            r = 2.0 * std::sqrt(y * (1.0 - y));
        }
        // <V, W> / sqrt(1 - <V,A>^2) for W uniform in the tangent space at A
        const double w = d_ == 2 ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : sample_uniform_radial(d_ - 1, rng);
        return std::exp(log_scale_ + kappa_ * (s * dot_ + r * perp_ * w));
    }

private:
    int d_;
    double kappa_;
    double dot_;
    double perp_;
    double half_;
    double inv_np1_;
    double log_scale_;
};

ProbabilityEstimate estimate_vmf_cell(const ExperimentSpec& spec, std::uint64_t n) {
    const CellSampler sampler(spec, n);
    const std::uint64_t blocks = (spec.trials + kCellBlock - 1) / kCellBlock;
    const RunningMoments moments = reduce_blocks(blocks, spec.workers, [&](std::uint64_t b) {
        RandomSource rng(spec.seed, stream_key({kTagCell, n, b}));
        const std::uint64_t count = std::min(kCellBlock, spec.trials - b * kCellBlock);
        RunningMoments m;
        for (std::uint64_t i = 0; i < count; ++i) m.add(sampler.draw(rng));
        return m;
    });
    return moments.estimate();
}

ProbabilityEstimate estimate_vmf_direct(const ExperimentSpec& spec, std::uint64_t n) {
    const std::uint64_t sets = std::min(spec.resample_sets, spec.trials);
    const std::uint64_t base = spec.trials / sets;
    const std::uint64_t extra = spec.trials % sets;
    std::atomic<std::uint64_t> hits{0};
    const std::uint64_t blocks = (sets + kSetBlock - 1) / kSetBlock;
    const RunningMoments fractions = reduce_blocks(blocks, spec.workers, [&](std::uint64_t b) {
        RunningMoments m;
        const std::uint64_t end = std::min(sets, (b + 1) * kSetBlock);
        for (std::uint64_t s = b * kSetBlock; s < end; ++s) {
            RandomSource rng(spec.seed, stream_key({kTagDirect, n, s}));
            auto [v, a] = place_anchor_pair(spec.d, spec.dot_va, rng);
            const ExactIndex index(anchored_set(spec.d, n, a, rng));
            const VmfParams params(v, spec.kappa);
            const std::uint64_t draws = base + (s < extra ? 1 : 0);
            std::uint64_t set_hits = 0;
            // vMF-exp draws, answered a batch at a time by the exact index.
            std::vector<double> queries;
            for (std::uint64_t done = 0; done < draws;) {
                const std::uint64_t count = std::min<std::uint64_t>(kQueryBatch, draws - done);
                queries.clear();
                for (std::uint64_t i = 0; i < count; ++i) {
                    const UnitVector q = sample(params, rng);
                    queries.insert(queries.end(), q.coords().begin(), q.coords().end());
                }
                for (const auto& hit : index.nearest_batch(queries)) {
                    if (hit.id == n) ++set_hits;
                }
                done += count;
            }
            hits += set_hits;
            m.add(static_cast<double>(set_hits) / static_cast<double>(draws));
        }
        return m;
    });
    return from_clustered_counts(hits.load(), spec.trials, fractions);
}

ProbabilityEstimate estimate_boltzmann_radial(const ExperimentSpec& spec, std::uint64_t n) {
    const double anchor_logit = spec.kappa * spec.dot_va;
    const std::uint64_t blocks = (spec.resample_sets + kSetBlock - 1) / kSetBlock;
    const RunningMoments moments = reduce_blocks(blocks, spec.workers, [&](std::uint64_t b) {
        RunningMoments m;
        const std::uint64_t end = std::min(spec.resample_sets, (b + 1) * kSetBlock);
        for (std::uint64_t s = b * kSetBlock; s < end; ++s) {
            const double lse = detail::log_sum_exp_uniform_radial(
                spec.d, spec.kappa, n, stream_key({spec.seed, kTagRadial, n, s}));
            m.add(1.0 / (1.0 + std::exp(lse - anchor_logit)));
        }
        return m;
    });
    return moments.estimate();
}

ProbabilityEstimate estimate_boltzmann_materialized(const ExperimentSpec& spec, std::uint64_t n) {
    const std::uint64_t blocks = (spec.resample_sets + kSetBlock - 1) / kSetBlock;
    const RunningMoments moments = reduce_blocks(blocks, spec.workers, [&](std::uint64_t b) {
        RunningMoments m;
        const std::uint64_t end = std::min(spec.resample_sets, (b + 1) * kSetBlock);
        for (std::uint64_t s = b * kSetBlock; s < end; ++s) {
            RandomSource rng(spec.seed, stream_key({kTagMaterialized, n, s}));
            auto [v, a] = place_anchor_pair(spec.d, spec.dot_va, rng);
            const auto set = anchored_set(spec.d, n, a, rng);
            m.add(prob_boltzmann(*set, v, spec.kappa, n));
        }
        return m;
    });
    return moments.estimate();
}

}  // namespace

void ExperimentSpec::validate() const {
    if (d < 2) throw DomainError("experiment: d must be >= 2");
    if (!std::isfinite(kappa) || kappa < 0.0) throw DomainError("experiment: kappa must be >= 0");
    if (!(dot_va >= -1.0 && dot_va <= 1.0)) throw DomainError("experiment: dot_va must lie in [-1, 1]");
    if (n_grid.empty()) throw DomainError("experiment: n_grid is empty");
    for (auto n : n_grid) check_n(n);
    if (trials < 1) throw DomainError("experiment: trials must be >= 1");
    if (resample_sets < 1) throw DomainError("experiment: resample_sets must be >= 1");
    if (workers < 1) throw DomainError("experiment: workers must be >= 1");
}

std::pair<UnitVector, UnitVector> place_anchor_pair(int d, double dot_va, RandomSource& rng) {
    if (!(dot_va >= -1.0 && dot_va <= 1.0)) throw DomainError("place_anchor_pair: dot_va must lie in [-1, 1]");
    UnitVector v = sample_uniform_sphere(d, rng);
    const UnitVector tangent = sample_tangent(v, rng);
    UnitVector a = compose_radial_tangent(v, dot_va, tangent);
    return {std::move(v), std::move(a)};
}

ProbabilityEstimate estimate_vmf_prob(const ExperimentSpec& spec, std::uint64_t n) {
    spec.validate();
    check_n(n);
    return spec.vmf_estimator == VmfEstimator::cell ? estimate_vmf_cell(spec, n)
                                                    : estimate_vmf_direct(spec, n);
}

ProbabilityEstimate estimate_boltzmann_prob(const ExperimentSpec& spec, std::uint64_t n) {
    spec.validate();
    check_n(n);
    if (spec.kappa == 0.0) {
        return {1.0 / (static_cast<double>(n) + 1.0), 0.0, spec.resample_sets};
    }
    return spec.boltzmann_estimator == BoltzmannEstimator::radial
               ? estimate_boltzmann_radial(spec, n)
               : estimate_boltzmann_materialized(spec, n);
}

std::vector<GridRow> run_grid(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<GridRow> rows;
    for (auto n : spec.n_grid) {
        const AsymptoticInput in{n, spec.d, spec.kappa, spec.dot_va};
        GridRow row{n, estimate_vmf_prob(spec, n), estimate_boltzmann_prob(spec, n), p0(in), std::nullopt};
        if (spec.d >= 3) row.p1 = p1(in);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace vmfexp
