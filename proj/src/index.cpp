#include "vmfexp/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "vmfexp/errors.hpp"
#include "vmfexp/random.hpp"

namespace vmfexp {

namespace {

constexpr std::size_t kBlock = 8;

bool better(const NeighborResult& a, const NeighborResult& b) {
    return a.score > b.score || (a.score == b.score && a.id < b.id);
}

struct WorseOnTop {
    bool operator()(const NeighborResult& a, const NeighborResult& b) const { return better(a, b); }
};

// Keeps the k best results seen so far.
class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    /// Scores below this can never enter.
    double threshold() const { return threshold_; }

    void offer(const NeighborResult& r) {
        if (r.score < threshold_) return;
        if (heap_.size() < k_) {
            heap_.push(r);
        } else if (better(r, heap_.top())) {
            heap_.pop();
            heap_.push(r);
        } else {
            return;
        }
        if (heap_.size() == k_) threshold_ = heap_.top().score;
    }

    std::vector<NeighborResult> sorted() {
        std::vector<NeighborResult> out;
        out.reserve(heap_.size());
        while (!heap_.empty()) {
            out.push_back(heap_.top());
            heap_.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    std::size_t k_;
    double threshold_ = -std::numeric_limits<double>::infinity();
    std::priority_queue<NeighborResult, std::vector<NeighborResult>, WorseOnTop> heap_;
};

using Lanes = float __attribute__((vector_size(kBlock * sizeof(float))));

constexpr std::size_t kGroupLanes = 8;
using Group = double __attribute__((vector_size(kGroupLanes * sizeof(double))));

// Scores of one block of 8 rows against q; two accumulators to hide FMA latency.
void block_scores(const float* block, const float* q, int d, float* out) {
    Lanes even = {};
    Lanes odd = {};
    int j = 0;
    for (; j + 1 < d; j += 2) {
        Lanes a, b;
        std::memcpy(&a, block + static_cast<std::size_t>(j) * kBlock, sizeof(a));
        std::memcpy(&b, block + static_cast<std::size_t>(j + 1) * kBlock, sizeof(b));
        even += q[j] * a;
        odd += q[j + 1] * b;
    }
    if (j < d) {
        Lanes a;
        std::memcpy(&a, block + static_cast<std::size_t>(j) * kBlock, sizeof(a));
        even += q[j] * a;
    }
    even += odd;
    std::memcpy(out, &even, sizeof(even));
}

// Appends one row to a dimension-major block store.
void append_row(std::vector<float>& blocks, std::size_t count, std::span<const double> row, int d) {
    const std::size_t slot = count % kBlock;
    if (slot == 0) blocks.resize(blocks.size() + kBlock * static_cast<std::size_t>(d), 0.0f);
    float* block = blocks.data() + (count / kBlock) * kBlock * static_cast<std::size_t>(d);
    for (int j = 0; j < d; ++j) block[static_cast<std::size_t>(j) * kBlock + slot] = static_cast<float>(row[j]);
}

void check_k(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) {
        throw DomainError("top_k: k must lie in [1, n], got " + std::to_string(k));
    }
}

}  // namespace

ExactIndex::ExactIndex(std::shared_ptr<const EmbeddingSet> embeddings)
    : embeddings_(std::move(embeddings)) {
    if (!embeddings_ || embeddings_->size() == 0) throw DomainError("ExactIndex: empty set");
}

void ExactIndex::check_query(std::span<const double> query) const {
    if (static_cast<int>(query.size()) != embeddings_->dim()) {
        throw DomainError("index query: dimension mismatch");
    }
}

NeighborResult ExactIndex::nearest(std::span<const double> query) const {
    check_query(query);
    const auto& set = *embeddings_;
    NeighborResult best{set.id(0), dot(query, set.row(0))};
    for (std::size_t r = 1; r < set.size(); ++r) {
        const NeighborResult c{set.id(r), dot(query, set.row(r))};
        if (better(c, best)) best = c;
    }
    return best;
}

NeighborResult ExactIndex::nearest(const UnitVector& query) const { return nearest(query.coords()); }

std::vector<NeighborResult> ExactIndex::nearest_batch(std::span<const double> queries) const {
    const auto& set = *embeddings_;
    const auto d = static_cast<std::size_t>(set.dim());
    if (queries.size() % d != 0) throw DomainError("nearest_batch: query data is not a multiple of d");
    const std::size_t m = queries.size() / d;
    constexpr std::size_t kGroup = 32;
    std::vector<NeighborResult> out(m);
    std::vector<double> transposed(d * kGroup);
    for (std::size_t q0 = 0; q0 < m; q0 += kGroup) {
        const std::size_t count = std::min(kGroup, m - q0);
        std::fill(transposed.begin(), transposed.end(), 0.0);
        for (std::size_t q = 0; q < count; ++q) {
            for (std::size_t k = 0; k < d; ++k) transposed[k * kGroup + q] = queries[(q0 + q) * d + k];
        }
        double best_score[kGroup];
        ActionId best_id[kGroup];
        for (std::size_t r = 0; r < set.size(); ++r) {
            const double* x = set.row(r).data();
            Group acc[kGroup / kGroupLanes] = {};
            for (std::size_t k = 0; k < d; ++k) {
                const double* col = transposed.data() + k * kGroup;
                for (std::size_t g = 0; g < kGroup / kGroupLanes; ++g) {
                    Group c;
                    std::memcpy(&c, col + g * kGroupLanes, sizeof(c));
                    acc[g] += x[k] * c;
                }
            }
            const ActionId id = set.id(r);
            double scores[kGroup];
            std::memcpy(scores, acc, sizeof(scores));
            for (std::size_t q = 0; q < count; ++q) {
                if (r == 0 || scores[q] > best_score[q] || (scores[q] == best_score[q] && id < best_id[q])) {
                    best_score[q] = scores[q];
                    best_id[q] = id;
                }
            }
        }
        for (std::size_t q = 0; q < count; ++q) out[q0 + q] = {best_id[q], best_score[q]};
    }
    return out;
}

std::vector<NeighborResult> ExactIndex::top_k(std::span<const double> query, std::size_t k) const {
    check_query(query);
    const auto& set = *embeddings_;
    check_k(k, set.size());
    if (4 * k >= set.size()) {
        std::vector<NeighborResult> all(set.size());
        for (std::size_t r = 0; r < set.size(); ++r) all[r] = {set.id(r), dot(query, set.row(r))};
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
        all.resize(k);
        return all;
    }
    TopK top(k);
    for (std::size_t r = 0; r < set.size(); ++r) top.offer({set.id(r), dot(query, set.row(r))});
    return top.sorted();
}

std::vector<NeighborResult> ExactIndex::top_k(const UnitVector& query, std::size_t k) const {
    return top_k(query.coords(), k);
}

ExactIndex build_exact(std::shared_ptr<const EmbeddingSet> embeddings) {
    return ExactIndex(std::move(embeddings));
}

ExactIndex build_exact(EmbeddingSet embeddings) {
    return ExactIndex(std::make_shared<const EmbeddingSet>(std::move(embeddings)));
}

ApproxIndex::ApproxIndex(std::shared_ptr<const EmbeddingSet> embeddings, const ApproxConfig& config)
    : embeddings_(std::move(embeddings)), probes_(config.probes) {
    if (!embeddings_ || embeddings_->size() == 0) throw DomainError("ApproxIndex: empty set");
    const auto& set = *embeddings_;
    const std::size_t n = set.size();
    d_ = set.dim();
    const std::size_t k = config.clusters;
    if (k < 1 || k > n) throw DomainError("ApproxIndex: clusters must lie in [1, n]");
    if (config.probes < 1 || config.probes > k) {
        throw DomainError("ApproxIndex: probes must lie in [1, clusters]");
    }
    if (n > std::numeric_limits<std::uint32_t>::max()) throw DomainError("ApproxIndex: n too large");
    const auto d = static_cast<std::size_t>(d_);

    // Training sample: a seeded partial shuffle of the rows.
    RandomSource rng(config.seed, stream_key({0x1f, n, k}));
    const std::size_t sample_size = std::min(n, std::max(k, k * config.training_per_cluster));
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = 0; i < sample_size; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(order[i], order[j]);
    }
    order.resize(sample_size);

    auto centroid_blocks = [&](const std::vector<float>& flat) {
        std::vector<float> blocks;
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> row(flat.begin() + static_cast<std::ptrdiff_t>(c * d),
                                    flat.begin() + static_cast<std::ptrdiff_t>((c + 1) * d));
            append_row(blocks, c, row, d_);
        }
        return blocks;
    };
    auto assign = [&](const std::vector<float>& blocks, std::span<const double> x) {
        std::vector<float> q(x.begin(), x.end());
        float scores[kBlock];
        std::size_t best = 0;
        float best_score = -std::numeric_limits<float>::infinity();
        for (std::size_t b = 0; b * kBlock < k; ++b) {
            block_scores(blocks.data() + b * kBlock * d, q.data(), d_, scores);
            const std::size_t valid = std::min(kBlock, k - b * kBlock);
            for (std::size_t l = 0; l < valid; ++l) {
                if (scores[l] > best_score) {
                    best_score = scores[l];
                    best = b * kBlock + l;
                }
            }
        }
        return best;
    };

    centroids_.assign(k * d, 0.0f);
    for (std::size_t c = 0; c < k; ++c) {
        const auto row = set.row(order[c]);
        for (std::size_t j = 0; j < d; ++j) centroids_[c * d + j] = static_cast<float>(row[j]);
    }
    for (int iter = 0; iter < config.kmeans_iterations && k > 1; ++iter) {
        const auto blocks = centroid_blocks(centroids_);
        std::vector<double> sums(k * d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::uint32_t r : order) {
            const std::size_t c = assign(blocks, set.row(r));
            const auto row = set.row(r);
            for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += row[j];
            ++counts[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            double norm2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) norm2 += sums[c * d + j] * sums[c * d + j];
            if (counts[c] == 0 || norm2 == 0.0) {
                const auto row = set.row(order[rng.below(order.size())]);
                for (std::size_t j = 0; j < d; ++j) centroids_[c * d + j] = static_cast<float>(row[j]);
                continue;
            }
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t j = 0; j < d; ++j) centroids_[c * d + j] = static_cast<float>(sums[c * d + j] * inv);
        }
    }

    lists_.assign(k, {});
    const auto blocks = centroid_blocks(centroids_);
    for (std::size_t r = 0; r < n; ++r) {
        auto& list = lists_[assign(blocks, set.row(r))];
        append_row(list.blocks, list.rows.size(), set.row(r), d_);
        list.rows.push_back(static_cast<std::uint32_t>(r));
    }
    // Centroids are scanned through the same block kernel at query time.
    centroids_ = blocks;
}

void ApproxIndex::set_probes(std::size_t probes) {
    if (probes < 1 || probes > clusters()) throw DomainError("ApproxIndex: probes must lie in [1, clusters]");
    probes_ = probes;
}

std::vector<NeighborResult> ApproxIndex::top_k(std::span<const double> query, std::size_t k) const {
    if (static_cast<int>(query.size()) != d_) throw DomainError("index query: dimension mismatch");
    const auto& set = *embeddings_;
    check_k(k, set.size());
    const auto d = static_cast<std::size_t>(d_);
    const std::size_t nc = lists_.size();
    std::vector<float> q(query.begin(), query.end());

    std::vector<std::pair<float, std::uint32_t>> order(nc);
    float scores[kBlock];
    for (std::size_t b = 0; b * kBlock < nc; ++b) {
        block_scores(centroids_.data() + b * kBlock * d, q.data(), d_, scores);
        for (std::size_t l = 0; l < kBlock && b * kBlock + l < nc; ++l) {
            order[b * kBlock + l] = {scores[l], static_cast<std::uint32_t>(b * kBlock + l)};
        }
    }
    auto by_score = [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    // Only the first `probes` lists are normally needed in order.
    const auto head = order.begin() + static_cast<std::ptrdiff_t>(probes_);
    std::nth_element(order.begin(), head - 1, order.end(), by_score);
    std::sort(order.begin(), head, by_score);
    bool tail_sorted = probes_ == nc;

    // Float pass keeps a margin of extra candidates; they are rescored exactly.
    const std::size_t keep = std::min(set.size(), 2 * k + 8);
    TopK coarse(keep);
    std::size_t seen = 0;
    for (std::size_t p = 0; p < nc && (p < probes_ || seen < k); ++p) {
        if (p == probes_ && !tail_sorted) {
            std::sort(head, order.end(), by_score);
            tail_sorted = true;
        }
        const auto& list = lists_[order[p].second];
        for (std::size_t b = 0; b * kBlock < list.rows.size(); ++b) {
            block_scores(list.blocks.data() + b * kBlock * d, q.data(), d_, scores);
            const std::size_t valid = std::min(kBlock, list.rows.size() - b * kBlock);
            const auto cut = static_cast<float>(coarse.threshold());
            bool any = false;
            for (std::size_t l = 0; l < kBlock; ++l) any |= scores[l] >= cut;
            if (!any) continue;
            for (std::size_t l = 0; l < valid; ++l) {
                coarse.offer({set.id(list.rows[b * kBlock + l]), static_cast<double>(scores[l])});
            }
        }
        seen += list.rows.size();
    }
    TopK fine(k);
    for (const auto& c : coarse.sorted()) fine.offer({c.id, dot(query, set.row(set.row_of(c.id)))});
    return fine.sorted();
}

std::vector<NeighborResult> ApproxIndex::top_k(const UnitVector& query, std::size_t k) const {
    return top_k(query.coords(), k);
}

NeighborResult ApproxIndex::nearest(std::span<const double> query) const { return top_k(query, 1).front(); }

NeighborResult ApproxIndex::nearest(const UnitVector& query) const { return nearest(query.coords()); }

ApproxIndex build_approx(std::shared_ptr<const EmbeddingSet> embeddings, std::size_t clusters,
                         std::size_t probes, std::uint64_t seed) {
    ApproxConfig config;
    config.clusters = clusters;
    config.probes = probes;
    config.seed = seed;
    return ApproxIndex(std::move(embeddings), config);
}

double recall_at_k(const ApproxIndex& approx, const ExactIndex& exact,
                   const std::vector<UnitVector>& queries, std::size_t k) {
    const auto& a = approx.embeddings();
    const auto& e = exact.embeddings();
    if (&a != &e && (a.size() != e.size() || a.dim() != e.dim() || a.ids() != e.ids())) {
        throw DomainError("recall_at_k: indexes hold different embedding sets");
    }
    if (queries.empty()) throw DomainError("recall_at_k: no queries");
    double total = 0.0;
    for (const auto& q : queries) {
        const auto truth = exact.top_k(q, k);
        const auto found = approx.top_k(q, k);
        std::vector<ActionId> t, f;
        for (const auto& r : truth) t.push_back(r.id);
        for (const auto& r : found) f.push_back(r.id);
        std::sort(t.begin(), t.end());
        std::sort(f.begin(), f.end());
        std::vector<ActionId> both;
        std::set_intersection(t.begin(), t.end(), f.begin(), f.end(), std::back_inserter(both));
        total += static_cast<double>(both.size()) / static_cast<double>(k);
    }
    return total / static_cast<double>(queries.size());
}

namespace {

constexpr char kMagic[8] = {'V', 'M', 'F', 'X', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    auto bits = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IoError("snapshot: truncated file");
    using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    Bits bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<Bits>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, int d, std::span<const double> rows,
                    std::span<const ActionId> ids) {
    if (d < 1 || rows.size() != ids.size() * static_cast<std::size_t>(d)) {
        throw DomainError("write_snapshot: rows do not match n * d");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, ids.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double x : rows) put_le<float>(out, static_cast<float>(x));
    for (ActionId id : ids) put_le<std::uint64_t>(out, id);
    if (!out.flush()) throw IoError("write failed for " + path.string());
}

void write_snapshot(const std::filesystem::path& path, const EmbeddingSet& embeddings) {
    write_snapshot(path, embeddings.dim(), embeddings.rows(), embeddings.ids());
}

SnapshotData read_snapshot_data(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw IoError("snapshot: bad magic in " + path.string());
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kVersion) throw IoError("snapshot: unsupported version " + std::to_string(version));
    const auto n = get_le<std::uint64_t>(in);
    const auto d = get_le<std::uint32_t>(in);
    const auto expected = 24 + n * d * 4 + n * 8;
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec || size != expected) throw IoError("snapshot: size does not match header");
    SnapshotData data;
    data.d = static_cast<int>(d);
    data.rows.resize(n * d);
    for (auto& x : data.rows) x = static_cast<double>(get_le<float>(in));
    data.ids.resize(n);
    for (auto& id : data.ids) id = get_le<std::uint64_t>(in);
    return data;
}

EmbeddingSet read_snapshot(const std::filesystem::path& path) {
    auto data = read_snapshot_data(path);
    return EmbeddingSet(data.d, std::move(data.rows), std::move(data.ids));
}

}  // namespace vmfexp
