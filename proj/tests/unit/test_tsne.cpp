#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "datasets.hpp"
#include "vocspace/error.hpp"
#include "vocspace/quality.hpp"
#include "vocspace/tsne.hpp"

using namespace vocspace;

TEST(Perplexity, EquidistantNeighborsAreUniform) {
  const std::vector<double> d = {4.0, 4.0, 4.0};
  for (double perp : {1.5, 2.0, 2.9}) {
    const auto row = perplexity_calibrate(d, perp);
    for (double p : row.p) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(row.perplexity, 3.0, 1e-12);
    EXPECT_FALSE(row.converged);
  }
}

TEST(Perplexity, NearNeighborDominatesAtLowPerplexity) {
  std::vector<double> d(20, 25.0);
  d[0] = 0.01;
  const auto row = perplexity_calibrate(d, 1.2);
  ASSERT_TRUE(row.converged);
  // Direct evaluation at the solved precision.
  double z = 0.0;
  for (double v : d) z += std::exp(-row.beta * v);
  const double p0 = std::exp(-row.beta * d[0]) / z;
  EXPECT_NEAR(row.p[0], p0, 1e-12);
  EXPECT_GT(p0, 0.9);
  double h = 0.0;
  for (double v : d) {
    const double p = std::exp(-row.beta * v) / z;
    if (p > 0.0) h -= p * std::log2(p);
  }
  EXPECT_NEAR(std::exp2(h), 1.2, 1e-4);
}

TEST(Perplexity, HitsTargetOnRandomRow) {
  const auto pts = testdata::gaussian(200, 10, 4);
  std::vector<double> d;
  for (std::size_t j = 1; j < pts.rows(); ++j) d.push_back(squared_distance(pts.row(0), pts.row(j)));
  const auto row = perplexity_calibrate(d, 30.0);
  ASSERT_TRUE(row.converged);
  EXPECT_NEAR(row.perplexity, 30.0, 1e-4);
  EXPECT_NEAR(std::accumulate(row.p.begin(), row.p.end(), 0.0), 1.0, 1e-12);
}

TEST(Perplexity, RejectsPerplexityAtRowLength) {
  const std::vector<double> d = {1.0, 2.0, 3.0};
  EXPECT_THROW(perplexity_calibrate(d, 3.0), InputError);
  EXPECT_THROW(perplexity_calibrate(d, 0.0), InputError);
}

TEST(JointP, SymmetricNonNegativeNormalized) {
  const auto pts = testdata::gaussian(120, 39, 8);
  const auto jp = joint_probabilities(pts, 20.0);
  double total = 0.0;
  for (std::size_t i = 0; i < jp.n; ++i) {
    EXPECT_EQ(jp.p[i * jp.n + i], 0.0);
    for (std::size_t j = 0; j < jp.n; ++j) {
      ASSERT_GE(jp.p[i * jp.n + j], 0.0);
      ASSERT_EQ(jp.p[i * jp.n + j], jp.p[j * jp.n + i]);
      total += jp.p[i * jp.n + j];
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_EQ(jp.unconverged_rows, 0u);
}

TEST(TsneParamsTest, PerplexityGuard) {
  TsneParams p;
  EXPECT_THROW(p.validate(90), InputError);  // 30 >= 89 / 3
  EXPECT_NO_THROW(p.validate(92));
  EXPECT_THROW(tsne_embed(testdata::gaussian(50, 3, 1), p), InputError);
}

TEST(TsneEmbed, IdenticalPairStaysTogether) {
  // Two identical points, one distant point, plus filler so that the
  // perplexity guard (perplexity < (n - 1) / 3) can be met.
  Matrix x(12, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    x(i, 0) = 0.3 * static_cast<double>(i);
    x(i, 1) = static_cast<double>(i % 3);
  }
  x(0, 2) = x(1, 2) = 5.0;
  x(0, 0) = x(1, 0) = 0.0;
  x(0, 1) = x(1, 1) = 0.0;
  x(2, 0) = 40.0;
  TsneParams p;
  p.perplexity = 3.0;
  p.n_epochs = 500;
  const auto r = tsne_embed(x, p);
  const double pair = std::sqrt(squared_distance(r.coords.row(0), r.coords.row(1)));
  EXPECT_LT(pair, std::sqrt(squared_distance(r.coords.row(0), r.coords.row(2))));
  EXPECT_LT(pair, std::sqrt(squared_distance(r.coords.row(1), r.coords.row(2))));
}

TEST(TsneEmbed, BlobsPurityTraceAndDeterminism) {
  const auto d = testdata::blobs(300, 3, 39, 1.0, 19);
  TsneParams p;
  p.n_epochs = 600;
  const auto a = tsne_embed(d.points, p);
  TsneParams threaded = p;
  threaded.threads = 3;
  const auto b = tsne_embed(d.points, threaded);
  EXPECT_EQ(a.coords, b.coords);

  const auto km = kmeans(a.coords, 3, 1);
  EXPECT_GE(purity(km.labels, d.labels), 0.90);

  ASSERT_EQ(a.kl_trace.size(), 12u);
  EXPECT_EQ(a.kl_trace.front().first, 50u);
  for (std::size_t c = 1; c < a.kl_trace.size(); ++c) {
    if (a.kl_trace[c - 1].first < p.exaggeration_epochs) continue;
    EXPECT_LE(a.kl_trace[c].second, a.kl_trace[c - 1].second + 1e-3) << a.kl_trace[c].first;
  }
}
