#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "datasets.hpp"
#include "vocspace/error.hpp"
#include "vocspace/neighbors.hpp"

using namespace vocspace;

namespace {

Matrix column(std::initializer_list<double> xs) {
  Matrix m(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

// O(n^2 log n) reference: full sort of every row by (distance, index).
KnnGraph scan_oracle(const Matrix& p, std::size_t k) {
  KnnGraph g{p.rows(), k, {}, {}};
  for (std::size_t i = 0; i < p.rows(); ++i) {
    std::vector<std::pair<double, std::uint32_t>> row;
    for (std::size_t j = 0; j < p.rows(); ++j) {
      if (i == j) continue;
      double s = 0.0;
      for (std::size_t d = 0; d < p.cols(); ++d) s += (p(i, d) - p(j, d)) * (p(i, d) - p(j, d));
      row.emplace_back(std::sqrt(s), static_cast<std::uint32_t>(j));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t r = 0; r < k; ++r) {
      g.indices.push_back(row[r].second);
      g.distances.push_back(row[r].first);
    }
  }
  return g;
}

void expect_well_formed(const KnnGraph& g, const Matrix& p) {
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto idx = g.neighbors(i);
    const auto dist = g.neighbor_distances(i);
    for (std::size_t r = 0; r < g.k; ++r) {
      ASSERT_LT(idx[r], g.n);
      ASSERT_NE(idx[r], i);
      const double d = std::sqrt(squared_distance(p.row(i), p.row(idx[r])));
      ASSERT_NEAR(dist[r], d, 1e-9 * std::max(1.0, d));
      if (r > 0) {
        ASSERT_LE(dist[r - 1], dist[r]);
      }
    }
  }
}

}  // namespace

TEST(KnnExact, CollinearHandChecked) {
  const auto g = knn_exact(column({0, 1, 3}), 1);
  EXPECT_EQ(g.neighbors(0)[0], 1u);
  EXPECT_EQ(g.neighbors(1)[0], 0u);
  EXPECT_EQ(g.neighbors(2)[0], 1u);
  EXPECT_DOUBLE_EQ(g.neighbor_distances(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(g.neighbor_distances(1)[0], 1.0);
  EXPECT_DOUBLE_EQ(g.neighbor_distances(2)[0], 2.0);
}

TEST(KnnExact, DuplicatesPreferLowerIndex) {
  const auto g = knn_exact(column({5, 5, 5, 9}), 2);
  EXPECT_EQ(g.neighbors(2)[0], 0u);
  EXPECT_EQ(g.neighbors(2)[1], 1u);
  EXPECT_EQ(g.neighbor_distances(2)[0], 0.0);
  EXPECT_EQ(g.neighbors(3)[0], 0u);
}

TEST(KnnExact, RejectsBadK) {
  EXPECT_THROW(knn_exact(column({0, 1, 2}), 3), InputError);
  EXPECT_THROW(knn_exact(column({0, 1, 2}), 0), InputError);
  EXPECT_THROW(knn_descent(column({0, 1, 2}), 5, 1), InputError);
}

TEST(KnnExact, MatchesScanOracle) {
  const auto p = testdata::gaussian(200, 39, 11);
  const auto g = knn_exact(p, 15);
  const auto ref = scan_oracle(p, 15);
  EXPECT_EQ(g.indices, ref.indices);
  for (std::size_t i = 0; i < g.distances.size(); ++i) {
    EXPECT_NEAR(g.distances[i], ref.distances[i], 1e-12);
  }
  expect_well_formed(g, p);
}

TEST(KnnExact, ThreadedEqualsSerial) {
  const auto p = testdata::gaussian(300, 8, 3);
  const auto a = knn_exact(p, 10, 1);
  const auto b = knn_exact(p, 10, 4);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.distances, b.distances);
}

TEST(KnnExact, TranslationAndScaling) {
  auto p = testdata::gaussian(150, 5, 21);
  const auto base = knn_exact(p, 7);
  Matrix shifted = p;
  Matrix scaled = p;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t d = 0; d < p.cols(); ++d) {
      shifted(i, d) += 3.5 - static_cast<double>(d);
      scaled(i, d) *= 2.5;
    }
  }
  const auto gs = knn_exact(shifted, 7);
  const auto gg = knn_exact(scaled, 7);
  EXPECT_EQ(gs.indices, base.indices);
  EXPECT_EQ(gg.indices, base.indices);
  for (std::size_t i = 0; i < base.distances.size(); ++i) {
    EXPECT_NEAR(gs.distances[i], base.distances[i], 1e-9 * base.distances[i]);
    EXPECT_NEAR(gg.distances[i], 2.5 * base.distances[i], 1e-9 * base.distances[i]);
  }
}

TEST(KnnDescent, SmallInputDelegatesToExact) {
  const auto p = testdata::gaussian(400, 39, 5);
  const auto approx = knn_descent(p, 15, 99);
  EXPECT_DOUBLE_EQ(knn_recall(approx, knn_exact(p, 15)), 1.0);
}

TEST(KnnDescent, RecallOnGaussianCloud) {
  const auto p = testdata::gaussian(5000, 39, 2024);
  const auto approx = knn_descent(p, 15, 7);
  const auto exact = knn_exact(p, 15);
  expect_well_formed(approx, p);
  EXPECT_GE(knn_recall(approx, exact), 0.95);
}

TEST(KnnDescent, DeterministicForSeed) {
  const auto p = testdata::gaussian(1500, 10, 8);
  const auto a = knn_descent(p, 10, 42);
  const auto b = knn_descent(p, 10, 42);
  EXPECT_EQ(a.indices, b.indices);
  EXPECT_EQ(a.distances, b.distances);
}

TEST(KnnGraphCsv, WritesOneLinePerEdge) {
  std::ostringstream out;
  write_knn_csv(out, knn_exact(column({0, 1, 3}), 1));
  EXPECT_EQ(out.str(), "i,rank,j,distance\n0,0,1,1\n1,0,0,1\n2,0,1,2\n");
}
