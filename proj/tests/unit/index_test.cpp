#include <gtest/gtest.h>

#include <cstring>

#include "incdsi/errors.hpp"
#include "incdsi/index.hpp"
#include "support/random.hpp"

namespace incdsi {
namespace {

using testing::random_index;
using testing::random_matrix;

TEST(Matrix, RejectsMismatchedData) {
  EXPECT_THROW(Matrix(2, 3, std::vector<float>(5)), ShapeError);
  EXPECT_THROW(Matrix::from_rows({{1.f, 2.f}, {3.f}}), ShapeError);
}

TEST(Matrix, PushRowFixesColumns) {
  Matrix m;
  m.push_row(std::vector<float>{1.f, 2.f});
  m.push_row(std::vector<float>{3.f, 4.f});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m(1, 0), 3.f);
  EXPECT_THROW(m.push_row(std::vector<float>{1.f}), ShapeError);
}

TEST(IndexState, ConstructionComputesDiagonal) {
  const Matrix v = Matrix::from_rows({{1.f, 0.f}, {0.f, 2.f}});
  const Matrix z = Matrix::from_rows({{3.f, 1.f}, {1.f, 1.f}});
  IndexState s(v, z, {"a", "b"});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.n0(), 2u);
  EXPECT_FLOAT_EQ(s.diag(0), 3.f);
  EXPECT_FLOAT_EQ(s.diag(1), 2.f);
  EXPECT_EQ(s.find("b"), 1u);
  EXPECT_FALSE(s.contains("c"));
}

TEST(IndexState, RejectsDuplicateIdAtConstruction) {
  const Matrix v(2, 2);
  EXPECT_THROW(IndexState(v, v, {"a", "a"}), DuplicateIdError);
}

TEST(IndexState, AppendValidatesAndLeavesStateUntouched) {
  IndexState s = random_index(3, 4, 7);
  const std::vector<float> good(4, 0.5f);
  EXPECT_THROW(s.append("d0", good, good), DuplicateIdError);
  EXPECT_THROW(s.append("x", std::vector<float>(3), good), ShapeError);
  std::vector<float> bad = good;
  bad[2] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(s.append("x", bad, good), InvalidArgument);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_FALSE(s.contains("x"));
}

TEST(IndexState, AppendKeepsPrefixBitIdenticalAndCacheCoherent) {
  IndexState s = random_index(5, 8, 11, /*block_rows=*/4);
  const Matrix before_v = s.doc_matrix();
  const Matrix before_z = s.query_matrix();
  const Matrix extra = random_matrix(100, 8, 99);
  for (std::size_t i = 0; i < 100; ++i) {
    s.append("new" + std::to_string(i), extra.row(i), extra.row((i + 1) % 100));
  }
  ASSERT_EQ(s.size(), 105u);
  EXPECT_EQ(s.n0(), 5u);
  const Matrix after_v = s.doc_matrix();
  const Matrix after_z = s.query_matrix();
  EXPECT_EQ(std::memcmp(after_v.data().data(), before_v.data().data(), before_v.data().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(after_z.data().data(), before_z.data().data(), before_z.data().size_bytes()), 0);
  EXPECT_EQ(s.stored_diag(), s.recompute_diag());
  for (std::size_t r = 0; r < s.size(); ++r) {
    EXPECT_EQ(s.find(s.doc_id(r)), r);
    EXPECT_NEAR(s.diag(r), static_cast<double>(testing::naive_dot(s.rep_query(r), s.doc_vector(r))), 1e-5);
  }
}

TEST(IndexState, ViewsIgnoreLaterAppends) {
  IndexState s = random_index(3, 4, 1, /*block_rows=*/2);
  const IndexView v = s.view();
  const std::vector<float> first(v.doc_vector(0).begin(), v.doc_vector(0).end());
  for (int i = 0; i < 10; ++i) s.append("n" + std::to_string(i), first, first);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(s.view().size(), 13u);
  EXPECT_TRUE(std::equal(first.begin(), first.end(), v.doc_vector(0).begin()));
}

TEST(IndexState, CopyIsIndependent) {
  IndexState a = random_index(3, 4, 2, /*block_rows=*/2);
  IndexState b = a;
  const std::vector<float> x(4, 1.f);
  b.append("only-in-b", x, x);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_FALSE(a.contains("only-in-b"));
  EXPECT_EQ(b.size(), 4u);
  a.append("only-in-a", x, x);
  EXPECT_FALSE(b.contains("only-in-a"));
}

TEST(IndexState, ForEachSpanCoversRowsInOrder) {
  IndexState s = random_index(10, 3, 5, /*block_rows=*/4);
  std::size_t next = 0;
  s.view().for_each_span([&](const RowSpan& span) {
    EXPECT_EQ(span.first_row, next);
    for (std::size_t i = 0; i < span.count; ++i) {
      EXPECT_TRUE(std::ranges::equal(span.doc_vector(i), s.doc_vector(next + i)));
      EXPECT_EQ(span.diag[i], s.diag(next + i));
    }
    next += span.count;
  });
  EXPECT_EQ(next, 10u);
}

TEST(IndexState, RestoreKeepsStoredDiagonal) {
  const Matrix v = Matrix::from_rows({{1.f, 0.f}});
  const std::vector<float> diag{42.f};
  IndexState s = IndexState::restore(v, v, diag, {"a"}, 1);
  EXPECT_EQ(s.diag(0), 42.f);
  EXPECT_THROW(IndexState::restore(v, v, diag, {"a"}, 2), InvalidArgument);
}

TEST(RepresentativeQuery, IsElementwiseMean) {
  const Matrix q = Matrix::from_rows({{1.f, 2.f}, {3.f, 6.f}});
  EXPECT_EQ(representative_query(q), (std::vector<float>{2.f, 4.f}));
  EXPECT_THROW(representative_query(Matrix()), InvalidArgument);
}

}  // namespace
}  // namespace incdsi
