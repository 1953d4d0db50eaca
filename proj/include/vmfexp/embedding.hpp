#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vmfexp/sphere.hpp"

namespace vmfexp {

using ActionId = std::uint64_t;

/// The action embeddings: n unit vectors of dimension d, stored row-major,
/// each with a unique id and an optional text label.
class EmbeddingSet {
public:
    /// Validates n >= 1, d >= 2, unit norms (1e-6) and unique ids.
    EmbeddingSet(int d, std::vector<double> rows, std::vector<ActionId> ids,
                 std::vector<std::string> labels = {});

    /// Ids default to 0..n-1.
    static EmbeddingSet from_vectors(const std::vector<UnitVector>& vectors,
                                     std::vector<ActionId> ids = {});

    std::size_t size() const { return ids_.size(); }
    int dim() const { return d_; }

    std::span<const double> row(std::size_t r) const {
        return {rows_.data() + r * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
    }
    ActionId id(std::size_t r) const { return ids_[r]; }
    const std::vector<ActionId>& ids() const { return ids_; }
    const std::vector<double>& rows() const { return rows_; }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<std::size_t> find(ActionId id) const;
    /// Row of `id`; DomainError when unknown.
    std::size_t row_of(ActionId id) const;

    UnitVector vector(std::size_t r) const;
    UnitVector vector_of(ActionId id) const { return vector(row_of(id)); }

private:
    int d_;
    std::vector<double> rows_;
    std::vector<ActionId> ids_;
    std::vector<std::string> labels_;
    bool dense_ids_ = true;  // ids[r] == r, no lookup table needed
    std::unordered_map<ActionId, std::size_t> row_by_id_;
};

}  // namespace vmfexp
