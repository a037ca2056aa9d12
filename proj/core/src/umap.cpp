#include "vocspace/umap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "vocspace/error.hpp"
#include "vocspace/parallel.hpp"
#include "vocspace/rows.hpp"

namespace vocspace {

void UmapParams::validate() const {
  if (n_neighbors < 2) throw InputError("n_neighbors must be at least 2");
  if (!(min_dist > 0.0)) throw InputError("min_dist must be positive");
  if (n_components != 2) throw InputError("only 2-D embeddings are supported");
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (negative_samples == 0) throw InputError("negative_samples must be positive");
}

std::size_t UmapParams::epochs_for(std::size_t n) const {
  if (n_epochs > 0) return n_epochs;
  return n <= 10000 ? 500 : 200;
}

SmoothKnn smooth_knn_calibrate(std::span<const double> d) {
  const std::size_t k = d.size();
  if (k < 2) throw InputError("smooth kNN calibration needs at least 2 distances");
  SmoothKnn s;
  double mean = 0.0;
  for (double v : d) {
    mean += v;
    if (v > 0.0 && (s.rho == 0.0 || v < s.rho)) s.rho = v;
  }
  mean /= static_cast<double>(k);
  const double floor = 1e-3 * mean;
  const double target = std::log2(static_cast<double>(k));

  auto total = [&](double sigma) {
    double acc = 0.0;
    for (double v : d) acc += std::exp(-std::max(0.0, v - s.rho) / sigma);
    return acc;
  };
  // Terms at or below rho contribute 1 regardless of sigma.
  const auto saturated = static_cast<double>(
      std::count_if(d.begin(), d.end(), [&](double v) { return v <= s.rho; }));
  if (saturated >= target) {
    s.sigma = floor;
    return s;
  }

  double lo = 0.0;
  double hi = std::max(1.0, mean);
  while (total(hi) < target) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) < target ? lo : hi) = mid;
  }
  s.sigma = std::max(0.5 * (lo + hi), floor);
  return s;
}

double membership(double d, const SmoothKnn& s) {
  if (d <= s.rho) return 1.0;
  if (s.sigma <= 0.0) return 0.0;
  return std::exp(-(d - s.rho) / s.sigma);
}

double FuzzyGraph::weight(std::size_t i, std::size_t j) const {
  const auto begin = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto end = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
  if (it == end || *it != j) return 0.0;
  return weights[static_cast<std::size_t>(it - cols.begin())];
}

FuzzyGraph fuzzy_union(std::size_t n, std::span<const DirectedMembership> memberships) {
  struct Pair {
    std::uint32_t lo, hi;
    bool forward;  // lo -> hi
    double strength;
  };
  std::vector<Pair> pairs;
  pairs.reserve(memberships.size());
  for (const auto& m : memberships) {
    if (m.from >= n || m.to >= n) throw InputError("membership index out of range");
    if (!(m.strength >= 0.0 && m.strength <= 1.0)) {
      throw InputError("membership strength outside [0, 1]");
    }
    if (m.from == m.to) continue;
    pairs.push_back({std::min(m.from, m.to), std::max(m.from, m.to), m.from < m.to, m.strength});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return x.lo < y.lo || (x.lo == y.lo && (x.hi < y.hi || (x.hi == y.hi && x.forward > y.forward)));
  });

  struct Entry {
    std::uint32_t row, col;
    double w;
  };
  std::vector<Entry> entries;
  entries.reserve(2 * pairs.size());
  for (std::size_t p = 0; p < pairs.size();) {
    double strength[2] = {0.0, 0.0};  // [backward, forward]
    bool seen[2] = {false, false};
    std::size_t q = p;
    for (; q < pairs.size() && pairs[q].lo == pairs[p].lo && pairs[q].hi == pairs[p].hi; ++q) {
      const int dir = pairs[q].forward ? 1 : 0;
      if (seen[dir]) throw InputError("duplicate directed membership");
      seen[dir] = true;
      strength[dir] = pairs[q].strength;
    }
    const double w = strength[0] + strength[1] - strength[0] * strength[1];
    if (w > 0.0) {
      entries.push_back({pairs[p].lo, pairs[p].hi, w});
      entries.push_back({pairs[p].hi, pairs[p].lo, w});
    }
    p = q;
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return x.row < y.row || (x.row == y.row && x.col < y.col);
  });

  FuzzyGraph g;
  g.n = n;
  g.row_ptr.assign(n + 1, 0);
  g.cols.reserve(entries.size());
  g.weights.reserve(entries.size());
  for (const auto& e : entries) {
    ++g.row_ptr[e.row + 1];
    g.cols.push_back(e.col);
    g.weights.push_back(e.w);
  }
  std::partial_sum(g.row_ptr.begin(), g.row_ptr.end(), g.row_ptr.begin());
  return g;
}

FuzzyGraph fuzzy_graph(const KnnGraph& knn) {
  std::vector<DirectedMembership> m;
  m.reserve(knn.n * knn.k);
  for (std::size_t i = 0; i < knn.n; ++i) {
    const auto d = knn.neighbor_distances(i);
    const auto s = smooth_knn_calibrate(d);
    const auto idx = knn.neighbors(i);
    for (std::size_t r = 0; r < knn.k; ++r) {
      m.push_back({static_cast<std::uint32_t>(i), idx[r], membership(d[r], s)});
    }
  }
  return fuzzy_union(knn.n, m);
}

double target_curve(double d, double min_dist) {
  return d <= min_dist ? 1.0 : std::exp(-(d - min_dist));
}

CurveFit fit_ab(double min_dist) {
  if (!(min_dist > 0.0)) throw InputError("min_dist must be positive");
  constexpr int kPoints = 300;
  std::vector<double> xs(kPoints);
  std::vector<double> ys(kPoints);
  for (int i = 0; i < kPoints; ++i) {
    xs[i] = 3.0 * (i + 1) / kPoints;
    ys[i] = target_curve(xs[i], min_dist);
  }
  auto sse = [&](double a, double b) {
    double acc = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double r = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b)) - ys[i];
      acc += r * r;
    }
    return acc;
  };

  double a = 1.0;
  double b = 1.0;
  double lambda = 1e-3;
  double cost = sse(a, b);
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    // Normal equations J^T J and J^T r for the 2-parameter model.
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (int i = 0; i < kPoints; ++i) {
      const double p = std::pow(xs[i], 2.0 * b);
      const double u = a * p;
      const double f = 1.0 / (1.0 + u);
      const double r = f - ys[i];
      const double da = -p * f * f;
      const double db = -u * 2.0 * std::log(xs[i]) * f * f;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double m11 = jaa * (1.0 + lambda);
      const double m22 = jbb * (1.0 + lambda);
      const double det = m11 * m22 - jab * jab;
      const double step_a = -(m22 * ga - jab * gb) / det;
      const double step_b = -(m11 * gb - jab * ga) / det;
      const double na = a + step_a;
      const double nb = b + step_b;
      const double next = (na > 0.0 && nb > 0.0) ? sse(na, nb) : std::numeric_limits<double>::infinity();
      if (next <= cost) {
        converged = std::abs(step_a) <= 1e-12 * (1.0 + a) && std::abs(step_b) <= 1e-12 * (1.0 + b);
        converged = converged || cost - next <= 1e-15 * cost;
        a = na;
        b = nb;
        cost = next;
        lambda = std::max(lambda * 0.3, 1e-12);
        break;
      }
      lambda *= 10.0;
    }
    if (lambda > 1e15) converged = true;  // no descent direction left
  }
  const double rms = std::sqrt(cost / kPoints);
  if (!converged || !std::isfinite(rms)) {
    throw NumericalError("a/b curve fit did not converge for min_dist " + std::to_string(min_dist));
  }
  return {a, b, rms};
}

namespace {

struct Edge {
  std::uint32_t head;
  std::uint32_t tail;
  std::uint32_t period;
};

std::vector<Edge> schedule(const FuzzyGraph& g) {
  double max_w = 0.0;
  for (double w : g.weights) max_w = std::max(max_w, w);
  std::vector<Edge> edges;
  edges.reserve(g.entries());
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
      const double ratio = std::round(max_w / g.weights[e]);
      const auto period = static_cast<std::uint32_t>(std::clamp(ratio, 1.0, 4.0e9));
      edges.push_back({static_cast<std::uint32_t>(i), g.cols[e], period});
    }
  }
  return edges;
}

double clip4(double v) { return std::clamp(v, -4.0, 4.0); }

// Plain and relaxed-atomic access to the coordinate buffer.
struct PlainAccess {
  double* data;
  double load(std::size_t i) const { return data[i]; }
  void add(std::size_t i, double v) const { data[i] += v; }
};

struct AtomicAccess {
  double* data;
  double load(std::size_t i) const {
    return std::atomic_ref<double>(data[i]).load(std::memory_order_relaxed);
  }
  void add(std::size_t i, double v) const {
    std::atomic_ref<double>(data[i]).fetch_add(v, std::memory_order_relaxed);
  }
};

template <typename Access>
std::size_t run_edges(std::span<const Edge> edges, std::size_t epoch, double alpha,
                      const CurveFit& curve, std::size_t n, std::size_t negatives,
                      std::mt19937_64& rng, const Access& y) {
  const double a = curve.a;
  const double b = curve.b;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::size_t updates = 0;
  for (const auto& e : edges) {
    if ((epoch + 1) % e.period != 0) continue;
    ++updates;
    const std::size_t i = e.head;
    const std::size_t j = e.tail;
    double diff[2];
    double d2 = 0.0;
    for (int c = 0; c < 2; ++c) {
      diff[c] = y.load(2 * i + c) - y.load(2 * j + c);
      d2 += diff[c] * diff[c];
    }
    if (d2 > 0.0) {
      const double coef = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
      for (int c = 0; c < 2; ++c) {
        const double g = clip4(coef * diff[c]) * alpha;
        y.add(2 * i + c, g);
        y.add(2 * j + c, -g);
      }
    }
    for (std::size_t s = 0; s < negatives; ++s) {
      const std::size_t k = pick(rng);
      if (k == i) continue;
      double nd2 = 0.0;
      for (int c = 0; c < 2; ++c) {
        diff[c] = y.load(2 * i + c) - y.load(2 * k + c);
        nd2 += diff[c] * diff[c];
      }
      if (nd2 > 0.0) {
        const double coef = 2.0 * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
        for (int c = 0; c < 2; ++c) y.add(2 * i + c, clip4(coef * diff[c]) * alpha);
      } else {
        for (int c = 0; c < 2; ++c) y.add(2 * i + c, 4.0 * alpha);
      }
    }
  }
  return updates;
}

}  // namespace

LayoutTrace optimize_layout(const FuzzyGraph& graph, Matrix& coords, const CurveFit& curve,
                            const UmapParams& params) {
  params.validate();
  if (coords.rows() != graph.n || coords.cols() != 2) {
    throw InputError("layout coordinates must be n x 2");
  }
  LayoutTrace trace;
  if (graph.n < 2 || graph.entries() == 0) return trace;
  const auto edges = schedule(graph);
  const std::size_t n_epochs = params.epochs_for(graph.n);
  std::mt19937_64 rng(params.seed);
  const std::size_t workers = params.parallel ? std::max<std::size_t>(1, params.threads) : 1;

  for (std::size_t epoch = 0; epoch < n_epochs; ++epoch) {
    const double alpha =
        params.learning_rate * (1.0 - static_cast<double>(epoch) / static_cast<double>(n_epochs));
    if (workers == 1) {
      trace.edge_updates += run_edges(std::span<const Edge>(edges), epoch, alpha, curve, graph.n,
                                      params.negative_samples, rng, PlainAccess{coords.data().data()});
    } else {
      const std::size_t block = (edges.size() + workers - 1) / workers;
      std::vector<std::size_t> counts(workers, 0);
      parallel_for(workers, workers, [&](std::size_t w) {
        const std::size_t begin = std::min(edges.size(), w * block);
        const std::size_t end = std::min(edges.size(), begin + block);
        std::mt19937_64 local(params.seed ^ (0x9e3779b97f4a7c15ULL * (epoch * workers + w + 1)));
        counts[w] = run_edges(std::span<const Edge>(edges).subspan(begin, end - begin), epoch,
                              alpha, curve, graph.n, params.negative_samples, local,
                              AtomicAccess{coords.data().data()});
      });
      for (auto c : counts) trace.edge_updates += c;
    }
    for (double v : coords.data()) {
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite embedding coordinate at epoch " + std::to_string(epoch));
      }
    }
    trace.epochs = epoch + 1;
  }
  return trace;
}

UmapResult umap_embed(const Matrix& points, const UmapParams& params) {
  params.validate();
  const auto canon = canonicalize(points, params.canonical_order, params.dedup);
  const std::size_t m = canon.rows.rows();
  if (m <= params.n_neighbors) {
    throw InputError("UMAP needs more than n_neighbors = " + std::to_string(params.n_neighbors) +
                     " distinct points, got " + std::to_string(m));
  }
  const auto knn = build_knn(canon.rows, params.n_neighbors, params.seed, params.threads);
  const auto graph = fuzzy_graph(knn);
  UmapResult out;
  out.curve = fit_ab(params.min_dist);
  auto init = initialize(graph, params.init, params.seed);
  out.init_fell_back = init.fell_back;
  out.epochs = optimize_layout(graph, init.coords, out.curve, params).epochs;
  out.unique_points = m;
  out.coords = canon.expand(init.coords);
  return out;
}

}  // namespace vocspace
