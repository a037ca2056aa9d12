#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vocspace/matrix.hpp"

namespace vocspace {

/// Trustworthiness of an embedding: 1 - 2/(n k (2n - 3k - 1)) times the sum,
/// over each point's k embedding neighbors, of how far their rank in the
/// original space exceeds k. Requires k < n/2.
double trustworthiness(const Matrix& original, const Matrix& embedded, std::size_t k);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeds; the best of `restarts` runs wins.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 10, std::size_t max_iterations = 300);

// Fraction of points whose cluster's majority class matches their own class.
double purity(std::span<const int> clusters, std::span<const int> classes);

}  // namespace vocspace
