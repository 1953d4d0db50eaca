#include "vmfexp/embedding.hpp"

#include <cmath>
#include <string>

#include "vmfexp/errors.hpp"

namespace vmfexp {

EmbeddingSet::EmbeddingSet(int d, std::vector<double> rows, std::vector<ActionId> ids,
                           std::vector<std::string> labels)
    : d_(d), rows_(std::move(rows)), ids_(std::move(ids)), labels_(std::move(labels)) {
    if (d < 2) throw DomainError("EmbeddingSet: d must be >= 2");
    if (ids_.empty()) throw DomainError("EmbeddingSet: empty set");
    if (rows_.size() != ids_.size() * static_cast<std::size_t>(d)) {
        throw DomainError("EmbeddingSet: row storage does not match n * d");
    }
    if (!labels_.empty() && labels_.size() != ids_.size()) {
        throw DomainError("EmbeddingSet: label count does not match n");
    }
    for (std::size_t r = 0; r < ids_.size() && dense_ids_; ++r) dense_ids_ = ids_[r] == r;
    if (!dense_ids_) row_by_id_.reserve(ids_.size());
    for (std::size_t r = 0; r < ids_.size(); ++r) {
        double norm2 = 0.0;
        for (double x : row(r)) norm2 += x * x;
        if (!(std::abs(std::sqrt(norm2) - 1.0) <= 1e-6)) {
            throw DomainError("EmbeddingSet: row " + std::to_string(r) + " is not unit norm");
        }
        if (!dense_ids_ && !row_by_id_.emplace(ids_[r], r).second) {
            throw DomainError("EmbeddingSet: duplicate id " + std::to_string(ids_[r]));
        }
    }
}

EmbeddingSet EmbeddingSet::from_vectors(const std::vector<UnitVector>& vectors,
                                        std::vector<ActionId> ids) {
    if (vectors.empty()) throw DomainError("EmbeddingSet: empty set");
    const int d = vectors.front().dim();
    std::vector<double> rows;
    rows.reserve(vectors.size() * static_cast<std::size_t>(d));
    for (const auto& v : vectors) {
        if (v.dim() != d) throw DomainError("EmbeddingSet: mixed dimensions");
        rows.insert(rows.end(), v.coords().begin(), v.coords().end());
    }
    if (ids.empty()) {
        ids.resize(vectors.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    }
    return EmbeddingSet(d, std::move(rows), std::move(ids));
}

std::optional<std::size_t> EmbeddingSet::find(ActionId id) const {
    if (dense_ids_) {
        if (id < ids_.size()) return static_cast<std::size_t>(id);
        return std::nullopt;
    }
    const auto it = row_by_id_.find(id);
    if (it == row_by_id_.end()) return std::nullopt;
    return it->second;
}

std::size_t EmbeddingSet::row_of(ActionId id) const {
    const auto r = find(id);
    if (!r) throw DomainError("unknown action id " + std::to_string(id));
    return *r;
}

UnitVector EmbeddingSet::vector(std::size_t r) const {
    if (r >= size()) throw DomainError("EmbeddingSet: row out of range");
    const auto x = row(r);
    return UnitVector(std::vector<double>(x.begin(), x.end()));
}

}  // namespace vmfexp
