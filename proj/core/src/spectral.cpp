#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vocspace/error.hpp"
#include "vocspace/umap.hpp"

namespace vocspace {
namespace {

constexpr double kBox = 10.0;

std::vector<double> degrees(const FuzzyGraph& g) {
  std::vector<double> deg(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) deg[i] += g.weights[e];
  }
  return deg;
}

// y = D^-1/2 W D^-1/2 x
void apply_normalized(const FuzzyGraph& g, const std::vector<double>& inv_sqrt_deg,
                      const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.setZero(static_cast<Eigen::Index>(g.n));
  for (std::size_t i = 0; i < g.n; ++i) {
    double acc = 0.0;
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      acc += g.weights[e] * inv_sqrt_deg[g.cols[e]] * x[g.cols[e]];
    }
    y[static_cast<Eigen::Index>(i)] = inv_sqrt_deg[i] * acc;
  }
}

bool dense_pair(const FuzzyGraph& g, const std::vector<double>& inv_sqrt_deg, Eigen::MatrixXd& v) {
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      lap(static_cast<Eigen::Index>(i), g.cols[e]) -=
          g.weights[e] * inv_sqrt_deg[i] * inv_sqrt_deg[g.cols[e]];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success) return false;
  v = solver.eigenvectors().middleCols(1, 2);
  return true;
}

// Two largest eigenpairs of the normalized adjacency restricted to the
// complement of its known top eigenvector sqrt(deg).
bool lanczos_pair(const FuzzyGraph& g, const std::vector<double>& deg,
                  const std::vector<double>& inv_sqrt_deg, Eigen::MatrixXd& v) {
  const auto n = static_cast<Eigen::Index>(g.n);
  Eigen::VectorXd top(n);
  for (Eigen::Index i = 0; i < n; ++i) top[i] = std::sqrt(deg[static_cast<std::size_t>(i)]);
  top.normalize();

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = gauss(rng);

  for (Eigen::Index steps : {64, 128, 256, 512}) {
    steps = std::min<Eigen::Index>(steps, n - 1);
    Eigen::MatrixXd q(n, steps);
    Eigen::VectorXd alpha(steps);
    Eigen::VectorXd beta(steps);
    Eigen::VectorXd w(n);
    Eigen::VectorXd x = start - top * top.dot(start);
    x.normalize();
    Eigen::Index built = 0;
    for (Eigen::Index j = 0; j < steps; ++j) {
      q.col(j) = x;
      built = j + 1;
      apply_normalized(g, inv_sqrt_deg, x, w);
      alpha[j] = x.dot(w);
      // Full reorthogonalization, twice, against the basis and the deflated vector.
      for (int pass = 0; pass < 2; ++pass) {
        w -= top * top.dot(w);
        w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
      }
      beta[j] = w.norm();
      if (beta[j] < 1e-12) break;  // invariant subspace found
      x = w / beta[j];
    }
    if (built < 2) return false;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(built, built);
    for (Eigen::Index j = 0; j < built; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < built) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    if (solver.info() != Eigen::Success) return false;
    // Eigenvalues ascend; the two largest sit at the end.
    bool converged = true;
    for (Eigen::Index c = built - 2; c < built; ++c) {
      const double residual = std::abs(beta[built - 1] * solver.eigenvectors()(built - 1, c));
      converged = converged && residual < 1e-8;
    }
    if (converged) {
      v.resize(n, 2);
      v.col(0) = q.leftCols(built) * solver.eigenvectors().col(built - 1);
      v.col(1) = q.leftCols(built) * solver.eigenvectors().col(built - 2);
      return true;
    }
    if (steps == n - 1) break;
  }
  return false;
}

FuzzyGraph subgraph(const FuzzyGraph& g, const std::vector<std::size_t>& nodes,
                    const std::vector<std::size_t>& local) {
  FuzzyGraph s;
  s.n = nodes.size();
  s.row_ptr.push_back(0);
  for (auto u : nodes) {
    for (std::size_t e = g.row_ptr[u]; e < g.row_ptr[u + 1]; ++e) {
      s.cols.push_back(static_cast<std::uint32_t>(local[g.cols[e]]));
      s.weights.push_back(g.weights[e]);
    }
    s.row_ptr.push_back(s.cols.size());
  }
  return s;
}

void scale_to_box(Matrix& m) {
  double peak = 0.0;
  for (double v : m.data()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return;
  for (double& v : m.data()) v *= kBox / peak;
}

Matrix random_coords(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-kBox, kBox);
  Matrix m(n, 2);
  for (double& v : m.data()) v = u(rng);
  return m;
}

}  // namespace

std::vector<std::size_t> connected_components(const FuzzyGraph& graph) {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(graph.n, kUnset);
  std::vector<std::size_t> stack;
  std::size_t next = 0;
  for (std::size_t root = 0; root < graph.n; ++root) {
    if (comp[root] != kUnset) continue;
    comp[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (std::size_t e = graph.row_ptr[u]; e < graph.row_ptr[u + 1]; ++e) {
        const auto w = graph.cols[e];
        if (comp[w] == kUnset) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

bool spectral_coordinates(const FuzzyGraph& graph, Matrix& out, SpectralSolver solver) {
  if (graph.n < 3) return false;
  const auto deg = degrees(graph);
  std::vector<double> inv_sqrt_deg(graph.n);
  for (std::size_t i = 0; i < graph.n; ++i) {
    if (deg[i] <= 0.0) return false;
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg[i]);
  }
  if (solver == SpectralSolver::Auto) {
    solver = graph.n <= kDenseSpectralLimit ? SpectralSolver::Dense : SpectralSolver::Lanczos;
  }
  Eigen::MatrixXd v;
  const bool ok = solver == SpectralSolver::Dense ? dense_pair(graph, inv_sqrt_deg, v)
                                                  : lanczos_pair(graph, deg, inv_sqrt_deg, v);
  if (!ok || !v.allFinite()) return false;
  out = Matrix(graph.n, 2);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index peak = 0;
    for (Eigen::Index i = 1; i < v.rows(); ++i) {
      if (std::abs(v(i, c)) > std::abs(v(peak, c))) peak = i;
    }
    const double sign = v(peak, c) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) = sign * v(i, c);
    }
  }
  return true;
}

InitResult initialize(const FuzzyGraph& graph, InitMethod method, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  InitResult result;
  if (method == InitMethod::Random) {
    result.coords = random_coords(graph.n, rng);
    return result;
  }

  const auto comp = connected_components(graph);
  const std::size_t n_comp =
      graph.n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<std::vector<std::size_t>> members(n_comp);
  for (std::size_t i = 0; i < graph.n; ++i) members[comp[i]].push_back(i);

  // Components share [-10, 10]^2 on a grid of equal cells, one per component.
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_comp))));
  const double cell = 2.0 * kBox / static_cast<double>(std::max<std::size_t>(side, 1));
  const double reach = 0.4 * cell;

  result.coords = Matrix(graph.n, 2);
  std::vector<std::size_t> local(graph.n, 0);
  for (std::size_t c = 0; c < n_comp; ++c) {
    const auto& nodes = members[c];
    for (std::size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = k;
    Matrix part;
    if (nodes.size() >= 3) {
      if (!spectral_coordinates(subgraph(graph, nodes, local), part)) {
        std::mt19937_64 fallback(seed);
        return {random_coords(graph.n, fallback), true};
      }
    } else {
      part = random_coords(nodes.size(), rng);
    }
    scale_to_box(part);
    const double cx = n_comp == 1 ? 0.0 : -kBox + cell * (static_cast<double>(c % side) + 0.5);
    const double cy = n_comp == 1 ? 0.0 : -kBox + cell * (static_cast<double>(c / side) + 0.5);
    const double scale = n_comp == 1 ? 1.0 : reach / kBox;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      result.coords(nodes[k], 0) = cx + scale * part(k, 0);
      result.coords(nodes[k], 1) = cy + scale * part(k, 1);
    }
  }
  return result;
}

}  // namespace vocspace
