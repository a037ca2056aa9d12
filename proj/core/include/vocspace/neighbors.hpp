#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "vocspace/matrix.hpp"

namespace vocspace {

/// k nearest neighbors per point, rows sorted by ascending Euclidean
/// distance (ties by smaller index). No self loops.
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::uint32_t> indices;  // n * k
  std::vector<double> distances;       // n * k

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {indices.data() + i * k, k};
  }
  std::span<const double> neighbor_distances(std::size_t i) const {
    return {distances.data() + i * k, k};
  }
};

// Brute-force scan. Throws InputError when k >= n or k == 0.
KnnGraph knn_exact(const Matrix& points, std::size_t k, std::size_t threads = 1);

struct DescentParams {
  std::size_t exact_below = 1000;  // n at or below this delegates to knn_exact
  std::size_t max_iterations = 20;
  double sample_rate = 1.0;        // rho: fraction of each list joined per round
  double termination = 0.0005;     // stop when updates < termination * n * pool
  std::size_t pool_extra = 10;     // candidate list length is k + pool_extra
};

/// Approximate kNN by neighbor-descent local joins. Serial and deterministic
/// for a fixed seed.
KnnGraph knn_descent(const Matrix& points, std::size_t k, std::uint64_t seed,
                     const DescentParams& params = {});

inline constexpr std::size_t kDescentThreshold = 20000;

// Exact below kDescentThreshold points, neighbor descent above.
KnnGraph build_knn(const Matrix& points, std::size_t k, std::uint64_t seed,
                   std::size_t threads = 1);

// Fraction of exact neighbors recovered by approx (set overlap per row).
double knn_recall(const KnnGraph& approx, const KnnGraph& exact);

// Debug dump: header "i,rank,j,distance".
void write_knn_csv(std::ostream& out, const KnnGraph& g);

}  // namespace vocspace
