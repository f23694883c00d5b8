#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "incdsi/index.hpp"
#include "incdsi/matrix.hpp"
#include "incdsi/objective.hpp"

namespace incdsi::io {

// Embedding file layout (all integers little-endian):
//   offset 0   char[4]  "IDSI"
//   offset 4   u32      format version (1)
//   offset 8   u64      rows m
//   offset 16  u32      columns h
//   offset 20  f32[m*h] row-major IEEE-754 payload
inline constexpr char kEmbeddingMagic[4] = {'I', 'D', 'S', 'I'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 20;

std::string encode_embedding_matrix(const Matrix& m);
/// Throws FormatError on bad magic, version, truncation, trailing bytes or
/// non-finite entries.
Matrix decode_embedding_matrix(std::string_view bytes);

void write_embedding_matrix(const Matrix& m, const std::filesystem::path& path);
Matrix read_embedding_matrix(const std::filesystem::path& path);

enum class QueryKind { natural, generated };
enum class QuerySplit { train, val, test };

std::string to_string(QueryKind kind);
std::string to_string(QuerySplit split);

/// One line of a query manifest: row_index \t doc_id \t kind \t split
struct QueryRecord {
  std::size_t row_index = 0;
  std::string doc_id;
  QueryKind kind = QueryKind::natural;
  QuerySplit split = QuerySplit::train;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

/// Parses TSV manifest text. Blank lines are skipped. When `rows` is given,
/// every row_index must be below it. Errors name the 1-based line number.
std::vector<QueryRecord> parse_query_manifest(std::string_view text,
                                              std::optional<std::size_t> rows = std::nullopt);
std::vector<QueryRecord> read_query_manifest(const std::filesystem::path& path,
                                             std::optional<std::size_t> rows = std::nullopt);
void write_query_manifest(const std::vector<QueryRecord>& records,
                          const std::filesystem::path& path);

// Snapshot layout (little-endian):
//   char[4] "IDSS", u32 version (1), u64 n0,
//   f64 lambda1, f64 lambda2, f64 gamma1, f64 gamma2, u32 loss_variant (0 squared, 1 hinge),
//   then four sections, each u64 byte length followed by the bytes:
//     V as an embedding file, Z as an embedding file,
//     d as an embedding file with h = 1, doc ids joined by '\n'.
inline constexpr char kSnapshotMagic[4] = {'I', 'D', 'S', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::string encode_snapshot(const IndexState& state, const Hyperparams& hp);
std::pair<IndexState, Hyperparams> decode_snapshot(std::string_view bytes);

void save_snapshot(const IndexState& state, const Hyperparams& hp,
                   const std::filesystem::path& path);
std::pair<IndexState, Hyperparams> load_snapshot(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace incdsi::io
