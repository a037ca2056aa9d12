#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vocspace/matrix.hpp"
#include "vocspace/neighbors.hpp"

namespace vocspace {

enum class InitMethod { Spectral, Random };

struct UmapParams {
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  std::size_t n_components = 2;
  std::size_t n_epochs = 0;  // 0 selects 500 for n <= 10000, else 200
  double learning_rate = 1.0;
  std::size_t negative_samples = 5;
  std::uint64_t seed = 42;
  InitMethod init = InitMethod::Spectral;
  bool dedup = true;         // embed each distinct row once
  bool canonical_order = true;  // embed in sorted row order, then restore
  bool parallel = false;     // lock-free layout updates; not reproducible
  std::size_t threads = 1;

  void validate() const;
  std::size_t epochs_for(std::size_t n) const;
};

struct SmoothKnn {
  double rho = 0.0;
  double sigma = 0.0;
};

/// Solves sum_i exp(-max(0, d_i - rho) / sigma) = log2(k) for sigma, where
/// k = d.size() and rho is the smallest positive distance. sigma is clamped
/// from below at 1e-3 * mean(d).
SmoothKnn smooth_knn_calibrate(std::span<const double> d);

// exp(-max(0, d - rho) / sigma), with 1 for d <= rho.
double membership(double d, const SmoothKnn& s);

struct DirectedMembership {
  std::uint32_t from;
  std::uint32_t to;
  double strength;
};

/// Symmetric sparse graph in CSR form. Both (i, j) and (j, i) are stored.
struct FuzzyGraph {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // n + 1
  std::vector<std::uint32_t> cols;
  std::vector<double> weights;

  std::size_t entries() const { return cols.size(); }
  // 0 when (i, j) is absent.
  double weight(std::size_t i, std::size_t j) const;
};

// w_ij = a_ij + a_ji - a_ij * a_ji; zero weights and self loops are dropped.
FuzzyGraph fuzzy_union(std::size_t n, std::span<const DirectedMembership> memberships);

// Calibrates every row of the kNN graph and unions the memberships.
FuzzyGraph fuzzy_graph(const KnnGraph& knn);

struct CurveFit {
  double a = 0.0;
  double b = 0.0;
  double rms = 0.0;
};

/// Least-squares fit of 1 / (1 + a d^(2b)) to the min_dist target curve on
/// 300 equispaced points in (0, 3]. Levenberg-Marquardt from (1, 1).
CurveFit fit_ab(double min_dist);

// Target curve: 1 for d <= min_dist, exp(-(d - min_dist)) beyond.
double target_curve(double d, double min_dist);

struct InitResult {
  Matrix coords;
  bool fell_back = false;  // spectral solve failed, random coordinates used
};

InitResult initialize(const FuzzyGraph& graph, InitMethod method, std::uint64_t seed);

enum class SpectralSolver { Auto, Dense, Lanczos };

inline constexpr std::size_t kDenseSpectralLimit = 1000;

/// Eigenvectors 2 and 3 of the symmetric normalized Laplacian of a connected
/// graph, as an n x 2 matrix with each column's largest-magnitude entry made
/// positive. Auto uses a dense solve up to kDenseSpectralLimit nodes and
/// Lanczos above. Returns false when the solver does not converge.
bool spectral_coordinates(const FuzzyGraph& graph, Matrix& out,
                          SpectralSolver solver = SpectralSolver::Auto);

// Connected component id per node, numbered by smallest member index.
std::vector<std::size_t> connected_components(const FuzzyGraph& graph);

struct LayoutTrace {
  std::size_t epochs = 0;
  std::size_t edge_updates = 0;
};

/// Negative-sampling SGD on the fuzzy cross-entropy. Modifies coords in place.
/// Throws NumericalError naming the epoch if a coordinate turns non-finite.
LayoutTrace optimize_layout(const FuzzyGraph& graph, Matrix& coords, const CurveFit& curve,
                            const UmapParams& params);

struct UmapResult {
  Matrix coords;
  CurveFit curve;
  std::size_t unique_points = 0;
  std::size_t epochs = 0;
  bool init_fell_back = false;
};

UmapResult umap_embed(const Matrix& points, const UmapParams& params);

}  // namespace vocspace
