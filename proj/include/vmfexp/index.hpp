#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "vmfexp/embedding.hpp"
#include "vmfexp/sphere.hpp"

namespace vmfexp {

struct NeighborResult {
    ActionId id;
    double score;
};

/// Brute-force maximum inner product search. Ties go to the smallest id.
class ExactIndex {
public:
    explicit ExactIndex(std::shared_ptr<const EmbeddingSet> embeddings);

    NeighborResult nearest(std::span<const double> query) const;
    NeighborResult nearest(const UnitVector& query) const;

    /// nearest() for each of the m row-major queries (m x d values), sharing one pass
    /// over the rows per group of queries. Scores may differ from nearest() in the last bit.
    std::vector<NeighborResult> nearest_batch(std::span<const double> queries) const;

    /// Best k by score, descending; 1 <= k <= n.
    std::vector<NeighborResult> top_k(std::span<const double> query, std::size_t k) const;
    std::vector<NeighborResult> top_k(const UnitVector& query, std::size_t k) const;

    const EmbeddingSet& embeddings() const { return *embeddings_; }
    const std::shared_ptr<const EmbeddingSet>& shared_embeddings() const { return embeddings_; }

private:
    void check_query(std::span<const double> query) const;

    std::shared_ptr<const EmbeddingSet> embeddings_;
};

ExactIndex build_exact(std::shared_ptr<const EmbeddingSet> embeddings);
ExactIndex build_exact(EmbeddingSet embeddings);

struct ApproxConfig {
    std::size_t clusters = 256;
    std::size_t probes = 16;
    int kmeans_iterations = 10;
    /// Rows used to train centroids, as a multiple of `clusters` (capped at n).
    std::size_t training_per_cluster = 32;
    std::uint64_t seed = 0x5eed;
};

/// Inverted-file index: spherical k-means centroids, float32 lists scanned
/// eight rows at a time, final candidates rescored in double.
class ApproxIndex {
public:
    ApproxIndex(std::shared_ptr<const EmbeddingSet> embeddings, const ApproxConfig& config);

    NeighborResult nearest(std::span<const double> query) const;
    NeighborResult nearest(const UnitVector& query) const;
    std::vector<NeighborResult> top_k(std::span<const double> query, std::size_t k) const;
    std::vector<NeighborResult> top_k(const UnitVector& query, std::size_t k) const;

    std::size_t clusters() const { return centroids_.size() / static_cast<std::size_t>(d_); }
    std::size_t probes() const { return probes_; }
    /// Lists scanned per query; 1 <= probes <= clusters.
    void set_probes(std::size_t probes);

    const EmbeddingSet& embeddings() const { return *embeddings_; }
    const std::shared_ptr<const EmbeddingSet>& shared_embeddings() const { return embeddings_; }

private:
    struct List {
        std::vector<float> blocks;  // per block of 8 rows: d x 8 floats, dimension-major
        std::vector<std::uint32_t> rows;
    };

    std::shared_ptr<const EmbeddingSet> embeddings_;
    int d_;
    std::size_t probes_;
    std::vector<float> centroids_;
    std::vector<List> lists_;
};

ApproxIndex build_approx(std::shared_ptr<const EmbeddingSet> embeddings, std::size_t clusters,
                         std::size_t probes, std::uint64_t seed = 0x5eed);

/// Mean over queries of |approx top-k  intersect  exact top-k| / k.
double recall_at_k(const ApproxIndex& approx, const ExactIndex& exact,
                   const std::vector<UnitVector>& queries, std::size_t k);

/// Binary snapshot: "VMFXIDX1", u32 version, u64 n, u32 d, n*d little-endian
/// float32 rows, n little-endian u64 ids.
struct SnapshotData {
    int d = 0;
    std::vector<double> rows;  // widened from float32
    std::vector<ActionId> ids;
};

void write_snapshot(const std::filesystem::path& path, int d, std::span<const double> rows,
                    std::span<const ActionId> ids);
void write_snapshot(const std::filesystem::path& path, const EmbeddingSet& embeddings);
SnapshotData read_snapshot_data(const std::filesystem::path& path);
EmbeddingSet read_snapshot(const std::filesystem::path& path);

}  // namespace vmfexp
