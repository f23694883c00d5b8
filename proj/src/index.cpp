#include "incdsi/index.hpp"

#include <cmath>
#include <string>

#include "incdsi/errors.hpp"
#include "incdsi/kernels.hpp"

namespace incdsi {

namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (float x : values) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains a non-finite entry");
  }
}

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ShapeError(std::string(what) + " has dimension " + std::to_string(got) + ", index has " +
                     std::to_string(want));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// IndexView

const detail::RowBlock& IndexView::block_of(std::size_t row) const {
  if (row >= rows_) {
    throw NotFoundError("row " + std::to_string(row) + " out of range (size " +
                        std::to_string(rows_) + ")");
  }
  return *(*blocks_)[row / block_rows_];
}

std::span<const float> IndexView::doc_vector(std::size_t row) const {
  const auto& block = block_of(row);
  return {block.doc_vectors.data() + (row % block_rows_) * dim_, dim_};
}

std::span<const float> IndexView::rep_query(std::size_t row) const {
  const auto& block = block_of(row);
  return {block.rep_queries.data() + (row % block_rows_) * dim_, dim_};
}

float IndexView::diag(std::size_t row) const { return block_of(row).diag[row % block_rows_]; }

const std::string& IndexView::doc_id(std::size_t row) const {
  return block_of(row).ids[row % block_rows_];
}

// ---------------------------------------------------------------------------
// IndexState

IndexState::IndexState(std::size_t dim, std::size_t block_rows)
    : dim_(dim), block_rows_(block_rows), blocks_(std::make_shared<detail::BlockList>()) {
  if (dim == 0) throw InvalidArgument("index dimension must be positive");
  if (block_rows == 0) throw InvalidArgument("block_rows must be positive");
}

IndexState::IndexState(const Matrix& doc_vectors, const Matrix& rep_queries,
                       std::vector<std::string> ids, std::size_t block_rows)
    : IndexState(doc_vectors.cols(), block_rows) {
  if (doc_vectors.rows() != rep_queries.rows() || doc_vectors.cols() != rep_queries.cols()) {
    throw ShapeError("document vectors and representative queries differ in shape");
  }
  if (ids.size() != doc_vectors.rows()) {
    throw ShapeError("got " + std::to_string(ids.size()) + " ids for " +
                     std::to_string(doc_vectors.rows()) + " rows");
  }
  if (!doc_vectors.all_finite() || !rep_queries.all_finite()) {
    throw InvalidArgument("initial matrices contain non-finite entries");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    append(std::move(ids[i]), doc_vectors.row(i), rep_queries.row(i));
  }
  n0_ = rows_;
}

IndexState IndexState::restore(const Matrix& doc_vectors, const Matrix& rep_queries,
                               std::span<const float> diag, std::vector<std::string> ids,
                               std::size_t n0) {
  if (doc_vectors.rows() != rep_queries.rows() || doc_vectors.cols() != rep_queries.cols()) {
    throw ShapeError("document vectors and representative queries differ in shape");
  }
  if (diag.size() != doc_vectors.rows() || ids.size() != doc_vectors.rows()) {
    throw ShapeError("diagonal or id table length does not match the row count");
  }
  if (n0 > doc_vectors.rows()) throw InvalidArgument("n0 exceeds the row count");
  IndexState state(doc_vectors.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (state.rows_by_id_.contains(ids[i])) throw DuplicateIdError("duplicate doc id: " + ids[i]);
    require_finite(doc_vectors.row(i), "document vector");
    require_finite(rep_queries.row(i), "representative query");
    state.append_unchecked(std::move(ids[i]), doc_vectors.row(i), rep_queries.row(i), diag[i]);
  }
  state.n0_ = n0;
  return state;
}

IndexState::IndexState(const IndexState& other)
    : dim_(other.dim_),
      block_rows_(other.block_rows_),
      rows_(other.rows_),
      n0_(other.n0_),
      rows_by_id_(other.rows_by_id_) {
  auto list = std::make_shared<detail::BlockList>();
  list->reserve(other.blocks_->size());
  for (const auto& block : *other.blocks_) {
    list->push_back(std::make_shared<detail::RowBlock>(*block));
  }
  blocks_ = std::move(list);
}

IndexState& IndexState::operator=(const IndexState& other) {
  if (this != &other) {
    IndexState copy(other);
    *this = std::move(copy);
  }
  return *this;
}

IndexView IndexState::view() const { return IndexView(blocks_, block_rows_, rows_, dim_, n0_); }

std::optional<std::size_t> IndexState::find(std::string_view id) const {
  auto it = rows_by_id_.find(std::string(id));
  if (it == rows_by_id_.end()) return std::nullopt;
  return it->second;
}

void IndexState::append(std::string id, std::span<const float> doc_vector,
                        std::span<const float> rep_query) {
  if (rows_by_id_.contains(id)) throw DuplicateIdError("duplicate doc id: " + id);
  require_dim(doc_vector.size(), dim_, "document vector");
  require_dim(rep_query.size(), dim_, "representative query");
  require_finite(doc_vector, "document vector");
  require_finite(rep_query, "representative query");
  const auto d = static_cast<float>(kernels::dot(rep_query, doc_vector));
  append_unchecked(std::move(id), doc_vector, rep_query, d);
}

void IndexState::append_unchecked(std::string id, std::span<const float> doc_vector,
                                  std::span<const float> rep_query, float diag) {
  const std::size_t slot = rows_ % block_rows_;
  if (slot == 0) {
    // A fresh list keeps every previously published view's block list intact.
    auto list = std::make_shared<detail::BlockList>(*blocks_);
    list->push_back(std::make_shared<detail::RowBlock>(block_rows_, dim_));
    blocks_ = std::move(list);
  }
  auto& block = *blocks_->back();
  std::copy(doc_vector.begin(), doc_vector.end(), block.doc_vectors.begin() + slot * dim_);
  std::copy(rep_query.begin(), rep_query.end(), block.rep_queries.begin() + slot * dim_);
  block.diag[slot] = diag;
  block.ids[slot] = id;
  rows_by_id_.emplace(std::move(id), rows_);
  ++rows_;
}

std::vector<float> IndexState::stored_diag() const {
  std::vector<float> out;
  out.reserve(rows_);
  view().for_each_span([&](const RowSpan& span) { out.insert(out.end(), span.diag, span.diag + span.count); });
  return out;
}

std::vector<float> IndexState::recompute_diag() const {
  std::vector<float> out;
  out.reserve(rows_);
  view().for_each_span([&](const RowSpan& span) {
    for (std::size_t i = 0; i < span.count; ++i) {
      out.push_back(static_cast<float>(kernels::dot(span.rep_query(i), span.doc_vector(i))));
    }
  });
  return out;
}

Matrix IndexState::doc_matrix() const {
  std::vector<float> data;
  data.reserve(rows_ * dim_);
  view().for_each_span([&](const RowSpan& span) {
    data.insert(data.end(), span.doc_vectors, span.doc_vectors + span.count * dim_);
  });
  return Matrix(rows_, dim_, std::move(data));
}

Matrix IndexState::query_matrix() const {
  std::vector<float> data;
  data.reserve(rows_ * dim_);
  view().for_each_span([&](const RowSpan& span) {
    data.insert(data.end(), span.rep_queries, span.rep_queries + span.count * dim_);
  });
  return Matrix(rows_, dim_, std::move(data));
}

std::vector<std::string> IndexState::ids() const {
  std::vector<std::string> out;
  out.reserve(rows_);
  const IndexView v = view();
  for (std::size_t i = 0; i < rows_; ++i) out.push_back(v.doc_id(i));
  return out;
}

std::vector<float> representative_query(const Matrix& queries) {
  if (queries.rows() == 0) throw InvalidArgument("representative query needs at least one query");
  std::vector<double> sum(queries.cols(), 0.0);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    kernels::axpy(1.0, queries.row(i), sum);
  }
  std::vector<float> out(queries.cols());
  const double inv = 1.0 / static_cast<double>(queries.rows());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = static_cast<float>(sum[j] * inv);
  return out;
}

}  // namespace incdsi
