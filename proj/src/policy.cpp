#include "vmfexp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "vmfexp/errors.hpp"

namespace vmfexp {

namespace {

void check_kappa(double kappa) {
    if (!std::isfinite(kappa) || kappa < 0.0) throw DomainError("kappa must be finite and >= 0");
}

void check_dim(const EmbeddingSet& embeddings, const UnitVector& v) {
    if (v.dim() != embeddings.dim()) throw DomainError("state vector dimension mismatch");
}

void check_same_set(const EmbeddingSet& embeddings, const ExactIndex& index) {
    if (&embeddings != &index.embeddings()) {
        throw DomainError("index was built over a different embedding set");
    }
}

// kappa <V, X_r> for every row, into a per-thread buffer.
const std::vector<double>& logits(const EmbeddingSet& embeddings, const UnitVector& v, double kappa) {
    thread_local std::vector<double> buffer;
    buffer.resize(embeddings.size());
    const auto q = v.coords();
    for (std::size_t r = 0; r < embeddings.size(); ++r) buffer[r] = kappa * dot(q, embeddings.row(r));
    return buffer;
}

// Draws `count` distinct positions from `weights` (unnormalized), renormalizing after each pick.
std::vector<std::size_t> draw_without_replacement(std::vector<double> weights, std::size_t count,
                                                  RandomSource& rng) {
    std::vector<std::size_t> picked;
    picked.reserve(count);
    double total = 0.0;
    for (double w : weights) total += w;
    for (std::size_t k = 0; k < count; ++k) {
        double u = rng.uniform() * total;
        std::size_t chosen = weights.size();
        std::size_t last_live = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_live = i;
            if (u < weights[i]) {
                chosen = i;
                break;
            }
            u -= weights[i];
        }
        // Rounding can leave u just past the last live weight.
        if (chosen == weights.size()) chosen = last_live;
        picked.push_back(chosen);
        total -= weights[chosen];
        weights[chosen] = 0.0;
        if (total <= 0.0) {
            total = 0.0;
            for (double w : weights) total += w;
        }
    }
    return picked;
}

std::vector<double> softmax_weights(const std::vector<double>& scores, double kappa) {
    double top = -std::numeric_limits<double>::infinity();
    for (double s : scores) top = std::max(top, kappa * s);
    std::vector<double> w(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) w[i] = std::exp(kappa * scores[i] - top);
    return w;
}

}  // namespace

double prob_random(std::size_t n) {
    if (n < 1) throw DomainError("prob_random: n must be >= 1");
    return 1.0 / static_cast<double>(n);
}

std::vector<double> boltzmann_probabilities(const EmbeddingSet& embeddings, const UnitVector& v,
                                            double kappa) {
    check_kappa(kappa);
    check_dim(embeddings, v);
    const auto& l = logits(embeddings, v, kappa);
    const double top = *std::max_element(l.begin(), l.end());
    double sum = 0.0;
    for (double x : l) sum += std::exp(x - top);
    const double lse = top + std::log(sum);
    std::vector<double> p(l.size());
    for (std::size_t r = 0; r < l.size(); ++r) p[r] = std::exp(l[r] - lse);
    return p;
}

double prob_boltzmann(const EmbeddingSet& embeddings, const UnitVector& v, double kappa, ActionId i) {
    const std::size_t row = embeddings.row_of(i);
    return boltzmann_probabilities(embeddings, v, kappa)[row];
}

ActionDraw sample_boltzmann(const EmbeddingSet& embeddings, const UnitVector& v, double kappa,
                            RandomSource& rng) {
    check_kappa(kappa);
    check_dim(embeddings, v);
    const auto& l = logits(embeddings, v, kappa);
    const double top = *std::max_element(l.begin(), l.end());
    thread_local std::vector<double> weights;
    weights.resize(l.size());
    double sum = 0.0;
    for (std::size_t r = 0; r < l.size(); ++r) {
        weights[r] = std::exp(l[r] - top);
        sum += weights[r];
    }
    double u = rng.uniform() * sum;
    std::size_t chosen = l.size() - 1;
    for (std::size_t r = 0; r < l.size(); ++r) {
        if (u < weights[r]) {
            chosen = r;
            break;
        }
        u -= weights[r];
    }
    return {embeddings.id(chosen), Mechanism::explore, std::nullopt};
}

double prob_truncated_boltzmann(const EmbeddingSet& embeddings, const ExactIndex& index,
                                const UnitVector& v, double kappa, std::size_t m, ActionId i) {
    check_kappa(kappa);
    check_same_set(embeddings, index);
    embeddings.row_of(i);
    if (m < 1 || m > embeddings.size()) throw DomainError("truncated Boltzmann: m must lie in [1, n]");
    const auto top = index.top_k(v, m);
    std::vector<double> scores;
    for (const auto& r : top) scores.push_back(r.score);
    const auto w = softmax_weights(scores, kappa);
    double total = 0.0;
    for (double x : w) total += x;
    for (std::size_t k = 0; k < top.size(); ++k) {
        if (top[k].id == i) return w[k] / total;
    }
    return 0.0;
}

ActionDraw sample_truncated_boltzmann(const EmbeddingSet& embeddings, const ExactIndex& index,
                                      const UnitVector& v, double kappa, std::size_t m,
                                      RandomSource& rng) {
    check_kappa(kappa);
    check_same_set(embeddings, index);
    if (m < 1 || m > embeddings.size()) throw DomainError("truncated Boltzmann: m must lie in [1, n]");
    const auto top = index.top_k(v, m);
    std::vector<double> scores;
    for (const auto& r : top) scores.push_back(r.score);
    const auto pick = draw_without_replacement(softmax_weights(scores, kappa), 1, rng);
    return {top[pick.front()].id, Mechanism::explore, std::nullopt};
}

ActionDraw sample_vmf_exp(const ExactIndex& index, const VmfParams& params, RandomSource& rng) {
    auto perturbed = sample(params, rng);
    const auto hit = index.nearest(perturbed);
    return {hit.id, Mechanism::explore, std::move(perturbed)};
}

ActionDraw sample_vmf_exp(const ApproxIndex& index, const VmfParams& params, RandomSource& rng) {
    auto perturbed = sample(params, rng);
    const auto hit = index.nearest(perturbed);
    return {hit.id, Mechanism::explore, std::move(perturbed)};
}

ActionDraw sample_vmf_exp(const EmbeddingSet& embeddings, const ExactIndex& index,
                          const UnitVector& v, double kappa, RandomSource& rng) {
    check_same_set(embeddings, index);
    check_dim(embeddings, v);
    return sample_vmf_exp(index, VmfParams(v, kappa), rng);
}

ActionDraw sample_epsilon_greedy(const EmbeddingSet& embeddings, const ExactIndex& index,
                                 const UnitVector& v, double epsilon, RandomSource& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
    check_same_set(embeddings, index);
    if (rng.uniform() < epsilon) {
        return {embeddings.id(rng.below(embeddings.size())), Mechanism::explore, std::nullopt};
    }
    return {index.nearest(v).id, Mechanism::exploit, std::nullopt};
}

std::vector<ActionId> generate_playlist(const EmbeddingSet& embeddings, const ExactIndex& index,
                                        ActionId seed_action, const PolicyConfig& policy,
                                        std::size_t length, RandomSource& rng) {
    check_same_set(embeddings, index);
    const std::size_t n = embeddings.size();
    if (length < 1 || length > n) throw DomainError("playlist length must lie in [1, n]");
    const UnitVector v = embeddings.vector_of(seed_action);
    std::vector<ActionId> out;
    out.reserve(length);

    auto ids_of = [](const std::vector<NeighborResult>& rs) {
        std::vector<ActionId> ids;
        for (const auto& r : rs) ids.push_back(r.id);
        return ids;
    };
    auto pool_size = [&]() {
        if (policy.m < length || policy.m > n) {
            throw DomainError("playlist: m must lie in [length, n]");
        }
        return policy.m;
    };

    switch (policy.kind) {
        case PolicyKind::vmf: {
            check_kappa(policy.kappa);
            const VmfParams params(v, policy.kappa);
            return ids_of(index.top_k(sample(params, rng), length));
        }
        case PolicyKind::truncated_boltzmann: {
            check_kappa(policy.kappa);
            const auto top = index.top_k(v, pool_size());
            std::vector<double> scores;
            for (const auto& r : top) scores.push_back(r.score);
            for (std::size_t k : draw_without_replacement(softmax_weights(scores, policy.kappa), length, rng)) {
                out.push_back(top[k].id);
            }
            return out;
        }
        case PolicyKind::random: {
            auto pool = ids_of(index.top_k(v, pool_size()));
            for (std::size_t i = 0; i < length; ++i) {
                std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
            }
            pool.resize(length);
            return pool;
        }
        case PolicyKind::boltzmann: {
            check_kappa(policy.kappa);
            std::vector<double> scores(n);
            for (std::size_t r = 0; r < n; ++r) scores[r] = dot(v.coords(), embeddings.row(r));
            for (std::size_t r : draw_without_replacement(softmax_weights(scores, policy.kappa), length, rng)) {
                out.push_back(embeddings.id(r));
            }
            return out;
        }
        case PolicyKind::epsilon_greedy: {
            if (!(policy.epsilon >= 0.0 && policy.epsilon <= 1.0)) {
                throw DomainError("epsilon must lie in [0, 1]");
            }
            std::unordered_set<ActionId> used;
            auto neighbors = ids_of(index.top_k(v, std::min(n, 2 * length)));
            std::size_t next = 0;
            while (out.size() < length) {
                ActionId id;
                if (rng.uniform() < policy.epsilon) {
                    do {
                        id = embeddings.id(rng.below(n));
                    } while (used.count(id));
                } else {
                    while (next < neighbors.size() && used.count(neighbors[next])) ++next;
                    if (next == neighbors.size()) {
                        neighbors = ids_of(index.top_k(v, n));
                        continue;
                    }
                    id = neighbors[next];
                }
                used.insert(id);
                out.push_back(id);
            }
            return out;
        }
    }
    throw DomainError("unknown policy kind");
}

double jaccard_diversity(const std::vector<std::vector<ActionId>>& playlists) {
    if (playlists.size() < 2) throw DomainError("jaccard_diversity: need at least 2 playlists");
    std::vector<std::vector<ActionId>> sets;
    for (auto p : playlists) {
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        sets.push_back(std::move(p));
    }
    double total = 0.0;
    std::size_t pairs = 0;
    std::vector<ActionId> scratch;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            scratch.clear();
            std::set_intersection(sets[i].begin(), sets[i].end(), sets[j].begin(), sets[j].end(),
                                  std::back_inserter(scratch));
            const std::size_t inter = scratch.size();
            const std::size_t uni = sets[i].size() + sets[j].size() - inter;
            total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

}  // namespace vmfexp
