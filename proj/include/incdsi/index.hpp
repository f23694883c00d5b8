#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "incdsi/matrix.hpp"

namespace incdsi {

namespace detail {

/// Fixed-capacity slab of rows. Slots below a view's row count are immutable;
/// the single writer only ever fills the next unpublished slot.
struct RowBlock {
  RowBlock(std::size_t capacity, std::size_t dim)
      : doc_vectors(capacity * dim), rep_queries(capacity * dim), diag(capacity), ids(capacity) {}

  std::vector<float> doc_vectors;
  std::vector<float> rep_queries;
  std::vector<float> diag;
  std::vector<std::string> ids;
};

using BlockList = std::vector<std::shared_ptr<RowBlock>>;

}  // namespace detail

/// Contiguous run of rows inside one storage block, handed to scan callbacks.
struct RowSpan {
  std::size_t first_row;
  std::size_t count;
  std::size_t dim;
  const float* doc_vectors;  // count x dim, row-major
  const float* rep_queries;  // count x dim, row-major
  const float* diag;         // count

  std::span<const float> doc_vector(std::size_t i) const noexcept {
    return {doc_vectors + i * dim, dim};
  }
  std::span<const float> rep_query(std::size_t i) const noexcept {
    return {rep_queries + i * dim, dim};
  }
};

/// Immutable, cheaply copyable snapshot of the committed rows of an index.
/// Safe to read from any thread while the owning IndexState keeps appending.
class IndexView {
 public:
  IndexView() = default;

  std::size_t size() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_ == 0; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n0() const noexcept { return n0_; }

  std::span<const float> doc_vector(std::size_t row) const;
  std::span<const float> rep_query(std::size_t row) const;
  float diag(std::size_t row) const;
  const std::string& doc_id(std::size_t row) const;

  /// Calls fn(const RowSpan&) for every block-contiguous run of rows, in row order.
  template <class Fn>
  void for_each_span(Fn&& fn) const {
    std::size_t row = 0;
    for (std::size_t b = 0; row < rows_; ++b) {
      const auto& block = *(*blocks_)[b];
      const std::size_t count = std::min(block_rows_, rows_ - row);
      fn(RowSpan{row, count, dim_, block.doc_vectors.data(), block.rep_queries.data(),
                 block.diag.data()});
      row += count;
    }
  }

 private:
  friend class IndexState;
  IndexView(std::shared_ptr<const detail::BlockList> blocks, std::size_t block_rows,
            std::size_t rows, std::size_t dim, std::size_t n0)
      : blocks_(std::move(blocks)), block_rows_(block_rows), rows_(rows), dim_(dim), n0_(n0) {}

  const detail::RowBlock& block_of(std::size_t row) const;

  std::shared_ptr<const detail::BlockList> blocks_;
  std::size_t block_rows_ = 1;
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::size_t n0_ = 0;
};

/// The live retrieval index: document vectors V, representative queries Z,
/// cached diagonal scores d_j = z_j . v_j, and the docid table.
///
/// Rows are append-only. Copying an IndexState produces an independent deep
/// copy; views taken with view() stay valid and unchanged across appends.
class IndexState {
 public:
  static constexpr std::size_t kDefaultBlockRows = 1024;

  explicit IndexState(std::size_t dim, std::size_t block_rows = kDefaultBlockRows);

  /// Builds an index from initial document vectors and representative queries.
  /// All initial rows count as original documents (n0 = rows).
  IndexState(const Matrix& doc_vectors, const Matrix& rep_queries, std::vector<std::string> ids,
             std::size_t block_rows = kDefaultBlockRows);

  /// Rebuilds a persisted state. The stored diagonal is taken as-is.
  static IndexState restore(const Matrix& doc_vectors, const Matrix& rep_queries,
                            std::span<const float> diag, std::vector<std::string> ids,
                            std::size_t n0);

  IndexState(const IndexState& other);
  IndexState& operator=(const IndexState& other);
  IndexState(IndexState&&) noexcept = default;
  IndexState& operator=(IndexState&&) noexcept = default;

  std::size_t size() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_ == 0; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n0() const noexcept { return n0_; }

  IndexView view() const;

  std::span<const float> doc_vector(std::size_t row) const { return view().doc_vector(row); }
  std::span<const float> rep_query(std::size_t row) const { return view().rep_query(row); }
  float diag(std::size_t row) const { return view().diag(row); }
  const std::string& doc_id(std::size_t row) const { return view().doc_id(row); }

  std::optional<std::size_t> find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id).has_value(); }

  /// Appends one document. d for the new row is rep_query . doc_vector.
  /// Throws DuplicateIdError, ShapeError or InvalidArgument (non-finite entry);
  /// the state is untouched when it throws.
  void append(std::string id, std::span<const float> doc_vector,
              std::span<const float> rep_query);

  std::vector<float> stored_diag() const;
  /// Recomputes z_j . v_j for every row from V and Z.
  std::vector<float> recompute_diag() const;

  Matrix doc_matrix() const;
  Matrix query_matrix() const;
  std::vector<std::string> ids() const;

 private:
  void append_unchecked(std::string id, std::span<const float> doc_vector,
                        std::span<const float> rep_query, float diag);

  std::size_t dim_;
  std::size_t block_rows_;
  std::size_t rows_ = 0;
  std::size_t n0_ = 0;
  std::shared_ptr<detail::BlockList> blocks_;
  std::unordered_map<std::string, std::size_t> rows_by_id_;
};

/// Element-wise mean of a document's query embeddings (one per row).
/// Accumulates in double, returns float. Throws InvalidArgument when empty.
std::vector<float> representative_query(const Matrix& queries);

}  // namespace incdsi
