#include "vocspace/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vocspace/error.hpp"
#include "vocspace/parallel.hpp"

namespace vocspace {

void TsneParams::validate(std::size_t n) const {
  if (n < 4) throw InputError("t-SNE needs at least 4 points");
  if (!(perplexity > 0.0) || !(3.0 * perplexity < static_cast<double>(n - 1))) {
    throw InputError("perplexity " + std::to_string(perplexity) + " must be below (n - 1) / 3 for n = " +
                     std::to_string(n));
  }
  if (n_epochs == 0) throw InputError("n_epochs must be positive");
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (!(early_exaggeration > 0.0)) throw InputError("early_exaggeration must be positive");
}

ConditionalRow perplexity_calibrate(std::span<const double> squared_distances, double perplexity) {
  const std::size_t m = squared_distances.size();
  if (m < 3) throw InputError("perplexity calibration needs at least 3 neighbors");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(m)) {
    throw InputError("perplexity " + std::to_string(perplexity) + " must be below the neighbor count " +
                     std::to_string(m));
  }
  // Shifting by the minimum leaves p unchanged and avoids underflow.
  const double shift = *std::min_element(squared_distances.begin(), squared_distances.end());

  ConditionalRow row;
  row.p.resize(m);
  auto evaluate = [&](double beta) {
    double z = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = squared_distances[j] - shift;
      row.p[j] = std::exp(-beta * d);
      z += row.p[j];
      weighted += d * row.p[j];
    }
    for (auto& v : row.p) v /= z;
    const double entropy_nats = std::log(z) + beta * weighted / z;
    return std::exp(entropy_nats);  // perplexity 2^H(bits) == e^H(nats)
  };

  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double best_beta = beta;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50; ++iter) {
    const double achieved = evaluate(beta);
    const double gap = std::abs(achieved - perplexity);
    if (gap < best_gap) {
      best_gap = gap;
      best_beta = beta;
    }
    if (gap <= 1e-4) {
      row.converged = true;
      break;
    }
    if (achieved > perplexity) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  row.beta = best_beta;
  row.perplexity = evaluate(best_beta);
  return row;
}

JointProbabilities joint_probabilities(const Matrix& points, double perplexity,
                                       std::size_t threads) {
  const std::size_t n = points.rows();
  JointProbabilities jp;
  jp.n = n;
  std::vector<double> cond(n * n, 0.0);
  std::vector<char> converged(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(squared_distance(points.row(i), points.row(j)));
    }
    const auto row = perplexity_calibrate(d, perplexity);
    converged[i] = row.converged ? 1 : 0;
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cond[i * n + j] = row.p[r++];
    }
  });
  jp.p.assign(n * n, 0.0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    jp.unconverged_rows += converged[i] ? 0 : 1;
    for (std::size_t j = 0; j < n; ++j) {
      jp.p[i * n + j] = (cond[i * n + j] + cond[j * n + i]) * scale;
    }
  }
  return jp;
}

namespace {

// Student-t affinities, per-row partial sums of the normalizer, and the
// gradient. Row-local so thread count does not change the result.
struct GradientWork {
  std::vector<double> num;       // n x n, 1 / (1 + |yi - yj|^2)
  std::vector<double> row_sums;  // sum_j num_ij per row
};

double kl_divergence(const JointProbabilities& jp, const GradientWork& w, double z) {
  double kl = 0.0;
  for (std::size_t k = 0; k < jp.p.size(); ++k) {
    const double p = jp.p[k];
    if (p > 0.0) kl += p * std::log(p / std::max(w.num[k] / z, 1e-300));
  }
  return kl;
}

}  // namespace

TsneResult tsne_embed(const Matrix& points, const TsneParams& params) {
  const std::size_t n = points.rows();
  params.validate(n);
  const auto jp = joint_probabilities(points, params.perplexity, params.threads);

  TsneResult result;
  result.unconverged_rows = jp.unconverged_rows;
  Matrix y(n, 2);
  {
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> g(0.0, 1e-4);
    for (double& v : y.data()) v = g(rng);
  }
  Matrix velocity(n, 2);
  Matrix gains(n, 2, 1.0);
  Matrix grad(n, 2);
  GradientWork work{std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0)};

  for (std::size_t epoch = 0; epoch < params.n_epochs; ++epoch) {
    const double exaggeration =
        epoch < params.exaggeration_epochs ? params.early_exaggeration : 1.0;
    const double momentum =
        epoch < params.momentum_switch ? params.momentum_initial : params.momentum_final;

    parallel_for(n, params.threads, [&](std::size_t i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          work.num[i * n + j] = 0.0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double v = 1.0 / (1.0 + dx * dx + dy * dy);
        work.num[i * n + j] = v;
        sum += v;
      }
      work.row_sums[i] = sum;
    });
    double z = 0.0;
    for (double s : work.row_sums) z += s;

    parallel_for(n, params.threads, [&](std::size_t i) {
      double gx = 0.0;
      double gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double num = work.num[i * n + j];
        const double coef = (exaggeration * jp.p[i * n + j] - num / z) * num;
        gx += coef * (y(i, 0) - y(j, 0));
        gy += coef * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gx;
      grad(i, 1) = 4.0 * gy;
    });

    if ((epoch + 1) % 50 == 0) {
      result.kl_trace.emplace_back(epoch + 1, kl_divergence(jp, work, z));
    }

    for (std::size_t k = 0; k < 2 * n; ++k) {
      double& gain = gains.data()[k];
      const double gk = grad.data()[k];
      double& vk = velocity.data()[k];
      gain = (gk > 0.0) != (vk > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, 0.01);
      vk = momentum * vk - params.learning_rate * gain * gk;
      y.data()[k] += vk;
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
      if (!std::isfinite(y(i, 0)) || !std::isfinite(y(i, 1))) {
        throw NumericalError("non-finite t-SNE coordinate at epoch " + std::to_string(epoch));
      }
    }
  }
  result.coords = std::move(y);
  return result;
}

}  // namespace vocspace
