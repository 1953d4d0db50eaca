#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vmfexp/embedding.hpp"
#include "vmfexp/random.hpp"

namespace vmfexp {

enum class EmbeddingFormat { text, snapshot };

struct RawEmbeddingFile {
    std::filesystem::path path;
    EmbeddingFormat format = EmbeddingFormat::text;
};

/// Vectors as read from disk, before centering: not yet unit norm, so not an EmbeddingSet.
struct RawEmbeddings {
    int d = 0;
    std::vector<double> rows;         // row-major, n x d
    std::vector<std::string> tokens;  // snapshot files use the decimal id
    std::size_t malformed_lines = 0;  // skipped: a field that is not a finite number
    std::size_t duplicate_tokens = 0;  // skipped: later occurrences of a token

    std::size_t size() const { return tokens.size(); }
};

/// Snapshot when the file starts with the snapshot magic, text otherwise.
/// IoError when the file cannot be opened.
EmbeddingFormat detect_embedding_format(const std::filesystem::path& path);

/// Text format: one `token x_1 ... x_d` line per vector, whitespace separated, LF or CRLF.
/// Coordinates are parsed as float32 and widened, so a snapshot round trip is exact.
///
/// A line with the wrong number of fields throws ParseError naming the line.
/// No vectors at all throws DomainError; IoError when the file cannot be read.
RawEmbeddings load_embeddings(const RawEmbeddingFile& file, std::optional<std::size_t> limit = std::nullopt);

/// Subtracts the mean and scales every row to unit norm. Rows that vanish after
/// centering are dropped and counted in `dropped`. Ids are 0..n-1 in file order,
/// tokens become labels.
EmbeddingSet center_and_normalize(const RawEmbeddings& raw, std::size_t* dropped = nullptr);
EmbeddingSet center_and_normalize(const EmbeddingSet& set, std::size_t* dropped = nullptr);

/// Two distinct members with |<X_V, X_A> - target| <= tolerance, by random pair probes.
/// NotFoundError carrying the closest dot seen once `probe_budget` probes are spent.
std::pair<ActionId, ActionId> find_pair_with_dot(const EmbeddingSet& set, double target, double tolerance,
                                                 RandomSource& rng, std::size_t probe_budget = 10'000'000);

/// Writes the raw rows in the index snapshot format with ids 0..n-1.
void save_snapshot(const std::filesystem::path& path, const RawEmbeddings& raw);

}  // namespace vmfexp
