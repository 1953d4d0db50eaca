#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vmfexp/embedding.hpp"
#include "vmfexp/index.hpp"
#include "vmfexp/random.hpp"
#include "vmfexp/sphere.hpp"
#include "vmfexp/vmf.hpp"

namespace vmfexp {

enum class PolicyKind { random, epsilon_greedy, boltzmann, truncated_boltzmann, vmf };

struct PolicyConfig {
    PolicyKind kind = PolicyKind::vmf;
    double kappa = 0.0;    // boltzmann, truncated_boltzmann, vmf
    double epsilon = 0.0;  // epsilon_greedy
    std::size_t m = 1;     // truncated_boltzmann, and the candidate pool of the random reference
};

enum class Mechanism { exploit, explore };

struct ActionDraw {
    ActionId id;
    Mechanism mechanism;
    std::optional<UnitVector> perturbed_state;  // the sampled state, vmf only
};

/// 1/n.
double prob_random(std::size_t n);

/// Softmax of kappa <V, X_i> over the whole set, by log-sum-exp.
double prob_boltzmann(const EmbeddingSet& embeddings, const UnitVector& v, double kappa, ActionId i);

/// All n Boltzmann probabilities in row order.
std::vector<double> boltzmann_probabilities(const EmbeddingSet& embeddings, const UnitVector& v,
                                            double kappa);

/// One exhaustive Boltzmann draw; Theta(n) work.
ActionDraw sample_boltzmann(const EmbeddingSet& embeddings, const UnitVector& v, double kappa,
                            RandomSource& rng);

/// Softmax restricted to the exact top-m of V; 0 outside it.
double prob_truncated_boltzmann(const EmbeddingSet& embeddings, const ExactIndex& index,
                                const UnitVector& v, double kappa, std::size_t m, ActionId i);

ActionDraw sample_truncated_boltzmann(const EmbeddingSet& embeddings, const ExactIndex& index,
                                      const UnitVector& v, double kappa, std::size_t m,
                                      RandomSource& rng);

/// Draws V~ ~ vMF(V, kappa) and returns its nearest neighbor.
ActionDraw sample_vmf_exp(const EmbeddingSet& embeddings, const ExactIndex& index,
                          const UnitVector& v, double kappa, RandomSource& rng);

/// Same, reusing precomputed vMF parameters; works with either index.
ActionDraw sample_vmf_exp(const ExactIndex& index, const VmfParams& params, RandomSource& rng);
ActionDraw sample_vmf_exp(const ApproxIndex& index, const VmfParams& params, RandomSource& rng);

ActionDraw sample_epsilon_greedy(const EmbeddingSet& embeddings, const ExactIndex& index,
                                 const UnitVector& v, double epsilon, RandomSource& rng);

/// A playlist of `length` distinct ids seeded by one action.
///
/// vmf: exact top-length of one sampled V~. truncated_boltzmann: top-m of V, then
/// `length` draws without replacement by renormalized softmax. random: top-m of V
/// shuffled. boltzmann: the same without-replacement scheme over all n.
/// epsilon_greedy: each slot is a fresh uniform pick with probability epsilon,
/// else the next unused neighbor of V.
std::vector<ActionId> generate_playlist(const EmbeddingSet& embeddings, const ExactIndex& index,
                                        ActionId seed_action, const PolicyConfig& policy,
                                        std::size_t length, RandomSource& rng);

/// Mean Jaccard similarity over all unordered pairs.
double jaccard_diversity(const std::vector<std::vector<ActionId>>& playlists);

}  // namespace vmfexp
