#include "vmfexp/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <string_view>
#include <unordered_set>

#include "vmfexp/errors.hpp"
#include "vmfexp/index.hpp"

namespace vmfexp {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        const std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

std::optional<float> parse_float(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    float value = 0.0f;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

RawEmbeddings load_text(const std::filesystem::path& path, std::optional<std::size_t> limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    RawEmbeddings raw;
    std::unordered_set<std::string> seen;
    std::vector<double> coords;
    std::string line;
    std::size_t line_no = 0;
    while ((!limit || raw.size() < *limit) && std::getline(in, line)) {
        ++line_no;
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        const int d = static_cast<int>(fields.size()) - 1;
        if (raw.d == 0) {
            if (d < 2) throw ParseError(line_no, "expected a token and at least 2 coordinates");
            raw.d = d;
        } else if (d != raw.d) {
            throw ParseError(line_no, "expected " + std::to_string(raw.d) + " coordinates, found " +
                                          std::to_string(d));
        }
        coords.clear();
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto value = parse_float(fields[k]);
            if (!value) break;
            coords.push_back(*value);
        }
        if (coords.size() != static_cast<std::size_t>(raw.d)) {
            ++raw.malformed_lines;
            continue;
        }
        std::string token(fields[0]);
        if (!seen.insert(token).second) {
            ++raw.duplicate_tokens;
            continue;
        }
        raw.rows.insert(raw.rows.end(), coords.begin(), coords.end());
        raw.tokens.push_back(std::move(token));
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
    return raw;
}

RawEmbeddings load_snapshot(const std::filesystem::path& path, std::optional<std::size_t> limit) {
    SnapshotData data = read_snapshot_data(path);
    RawEmbeddings raw;
    raw.d = data.d;
    std::size_t n = data.ids.size();
    if (limit && *limit < n) n = *limit;
    data.rows.resize(n * static_cast<std::size_t>(data.d));
    raw.rows = std::move(data.rows);
    raw.tokens.reserve(n);
    for (std::size_t i = 0; i < n; ++i) raw.tokens.push_back(std::to_string(data.ids[i]));
    return raw;
}

EmbeddingSet normalize_rows(int d, std::span<const double> rows, std::span<const std::string> labels,
                            std::size_t* dropped) {
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t n = rows.size() / dd;
    if (n < 2) throw DomainError("center_and_normalize: need at least 2 vectors");
    std::vector<long double> mean(dd, 0.0L);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < dd; ++k) mean[k] += rows[r * dd + k];
    }
    for (auto& m : mean) m /= static_cast<long double>(n);

    std::vector<double> centered(n * dd);
    std::vector<double> norms(n);
    double largest = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dd; ++k) {
            const double x = static_cast<double>(rows[r * dd + k] - mean[k]);
            centered[r * dd + k] = x;
            sq += x * x;
        }
        norms[r] = std::sqrt(sq);
        largest = std::max(largest, norms[r]);
    }
    if (largest == 0.0) throw DegenerateSetError("center_and_normalize: all vectors are identical");

    std::vector<double> out;
    out.reserve(n * dd);
    std::vector<std::string> kept_labels;
    std::size_t removed = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (norms[r] <= 1e-12 * largest) {
            ++removed;
            continue;
        }
        for (std::size_t k = 0; k < dd; ++k) out.push_back(centered[r * dd + k] / norms[r]);
        if (!labels.empty()) kept_labels.push_back(labels[r]);
    }
    if (dropped) *dropped = removed;
    const std::size_t kept = n - removed;
    std::vector<ActionId> ids(kept);
    for (std::size_t i = 0; i < kept; ++i) ids[i] = i;
    return EmbeddingSet(d, std::move(out), std::move(ids), std::move(kept_labels));
}

}  // namespace

EmbeddingFormat detect_embedding_format(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (in.gcount() == 8 && std::string_view(magic, 8) == "VMFXIDX1") return EmbeddingFormat::snapshot;
    return EmbeddingFormat::text;
}

RawEmbeddings load_embeddings(const RawEmbeddingFile& file, std::optional<std::size_t> limit) {
    if (limit && *limit == 0) throw DomainError("load_embeddings: limit must be >= 1");
    RawEmbeddings raw = file.format == EmbeddingFormat::text ? load_text(file.path, limit)
                                                             : load_snapshot(file.path, limit);
    if (raw.size() == 0) throw DomainError("load_embeddings: no vectors in " + file.path.string());
    return raw;
}

EmbeddingSet center_and_normalize(const RawEmbeddings& raw, std::size_t* dropped) {
    return normalize_rows(raw.d, raw.rows, raw.tokens, dropped);
}

EmbeddingSet center_and_normalize(const EmbeddingSet& set, std::size_t* dropped) {
    return normalize_rows(set.dim(), set.rows(), set.labels(), dropped);
}

std::pair<ActionId, ActionId> find_pair_with_dot(const EmbeddingSet& set, double target, double tolerance,
                                                 RandomSource& rng, std::size_t probe_budget) {
    if (!(tolerance > 0.0)) throw DomainError("find_pair_with_dot: tolerance must be > 0");
    if (!std::isfinite(target)) throw DomainError("find_pair_with_dot: target must be finite");
    const std::size_t n = set.size();
    if (n < 2) throw DomainError("find_pair_with_dot: need at least 2 vectors");
    double closest = std::numeric_limits<double>::quiet_NaN();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t probe = 0; probe < probe_budget; ++probe) {
        const std::size_t i = rng.below(n);
        std::size_t j = rng.below(n - 1);
        if (j >= i) ++j;
        const double value = dot(set.row(i), set.row(j));
        const double gap = std::abs(value - target);
        if (gap <= tolerance) return {set.id(i), set.id(j)};
        if (gap < best_gap) {
            best_gap = gap;
            closest = value;
        }
    }
    throw NotFoundError("find_pair_with_dot: no pair within " + std::to_string(tolerance) + " of " +
                            std::to_string(target) + " (closest " + std::to_string(closest) + ")",
                        closest);
}

void save_snapshot(const std::filesystem::path& path, const RawEmbeddings& raw) {
    std::vector<ActionId> ids(raw.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    write_snapshot(path, raw.d, raw.rows, ids);
}

}  // namespace vmfexp
