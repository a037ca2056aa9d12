#include "vocspace/quality.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "vocspace/error.hpp"

namespace vocspace {
namespace {

// Indices of all other points sorted by (distance, index).
std::vector<std::size_t> ranked(const Matrix& m, std::size_t i) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(m.rows() - 1);
  for (std::size_t j = 0; j < m.rows(); ++j) {
    if (j != i) d.emplace_back(squared_distance(m.row(i), m.row(j)), j);
  }
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out(d.size());
  for (std::size_t r = 0; r < d.size(); ++r) out[r] = d[r].second;
  return out;
}

}  // namespace

double trustworthiness(const Matrix& original, const Matrix& embedded, std::size_t k) {
  const std::size_t n = original.rows();
  if (embedded.rows() != n) throw InputError("trustworthiness needs aligned point sets");
  if (k == 0 || 2 * k >= n) throw InputError("trustworthiness needs 0 < k < n/2");
  double penalty = 0.0;
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto orig = ranked(original, i);
    for (std::size_t r = 0; r < orig.size(); ++r) rank[orig[r]] = r + 1;
    const auto emb = ranked(embedded, i);
    for (std::size_t r = 0; r < k; ++r) {
      const auto rr = rank[emb[r]];
      if (rr > k) penalty += static_cast<double>(rr - k);
    }
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return 1.0 - 2.0 / (nd * kd * (2.0 * nd - 3.0 * kd - 1.0)) * penalty;
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts,
                    std::size_t max_iterations) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (k == 0 || k > n) throw InputError("k-means needs 1 <= k <= n");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  for (std::size_t run = 0; run < std::max<std::size_t>(restarts, 1); ++run) {
    Matrix centers(k, dim);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::size_t chosen = first(rng);
    for (std::size_t c = 0; c < k; ++c) {
      std::ranges::copy(points.row(chosen), centers.row(c).begin());
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], squared_distance(points.row(i), centers.row(c)));
        total += nearest[i];
      }
      if (c + 1 == k) break;
      if (total <= 0.0) {
        chosen = first(rng);
        continue;
      }
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= nearest[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    }

    std::vector<int> labels(n, -1);
    double inertia = 0.0;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
          const double d = squared_distance(points.row(i), centers.row(c));
          if (d < dmin) {
            dmin = d;
            arg = static_cast<int>(c);
          }
        }
        changed = changed || labels[i] != arg;
        labels[i] = arg;
        inertia += dmin;
      }
      if (!changed) break;
      Matrix sums(k, dim);
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        ++counts[c];
        for (std::size_t d = 0; d < dim; ++d) sums(c, d) += points(i, d);
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its center
        for (std::size_t d = 0; d < dim; ++d) {
          centers(c, d) = sums(c, d) / static_cast<double>(counts[c]);
        }
      }
    }
    if (inertia < best.inertia) best = {std::move(labels), std::move(centers), inertia};
  }
  return best;
}

double purity(std::span<const int> clusters, std::span<const int> classes) {
  if (clusters.size() != classes.size() || clusters.empty()) {
    throw InputError("purity needs equal-length nonempty label lists");
  }
  std::map<int, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][classes[i]];
  std::size_t agree = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t top = 0;
    for (const auto& [cls, count] : counts) top = std::max(top, count);
    agree += top;
  }
  return static_cast<double>(agree) / static_cast<double>(clusters.size());
}

}  // namespace vocspace
