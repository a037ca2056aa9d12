#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vocspace/matrix.hpp"

namespace vocspace {

struct TsneParams {
  double perplexity = 30.0;
  std::size_t n_epochs = 1000;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_epochs = 250;
  double learning_rate = 200.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  std::size_t momentum_switch = 250;
  std::uint64_t seed = 42;
  std::size_t threads = 1;

  // Throws InputError unless perplexity < (n - 1) / 3 and the rest are positive.
  void validate(std::size_t n) const;
};

struct ConditionalRow {
  std::vector<double> p;  // p_{j|i} over the given neighbors, sums to 1
  double beta = 1.0;      // precision 1 / (2 sigma^2)
  double perplexity = 0.0;  // achieved 2^H
  bool converged = false;
};

/// Bisection on beta so that 2^H(p) is within 1e-4 of `perplexity`, capped at
/// 50 iterations. On failure the best beta is kept and converged is false.
ConditionalRow perplexity_calibrate(std::span<const double> squared_distances, double perplexity);

struct JointProbabilities {
  std::size_t n = 0;
  std::vector<double> p;  // dense n x n, symmetric, sums to 1
  std::size_t unconverged_rows = 0;
};

JointProbabilities joint_probabilities(const Matrix& points, double perplexity,
                                       std::size_t threads = 1);

struct TsneResult {
  Matrix coords;
  std::vector<std::pair<std::size_t, double>> kl_trace;  // (epoch, KL) every 50 epochs
  std::size_t unconverged_rows = 0;
};

/// Exact-gradient t-SNE into 2-D. Bit-identical for a fixed seed regardless
/// of the thread count. Throws NumericalError naming the epoch on NaN.
TsneResult tsne_embed(const Matrix& points, const TsneParams& params);

}  // namespace vocspace
