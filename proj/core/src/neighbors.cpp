#include "vocspace/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"
#include "vocspace/parallel.hpp"

namespace vocspace {
namespace {

void check_k(std::size_t n, std::size_t k) {
  if (k == 0) throw InputError("k must be positive");
  if (k >= n) {
    throw InputError("k = " + std::to_string(k) + " must be smaller than the number of points (" +
                     std::to_string(n) + ")");
  }
}

struct Candidate {
  double dist;
  std::uint32_t id;
  bool fresh;
};

bool closer(double da, std::uint32_t a, double db, std::uint32_t b) {
  return da < db || (da == db && a < b);
}

// Bounded list kept sorted by (dist, id).
class CandidateList {
 public:
  explicit CandidateList(std::size_t capacity) : capacity_(capacity) {
    items_.reserve(capacity + 1);
  }

  // Returns true when the list changed.
  bool insert(double dist, std::uint32_t id) {
    if (items_.size() == capacity_ && !closer(dist, id, items_.back().dist, items_.back().id)) {
      return false;
    }
    for (const auto& c : items_) {
      if (c.id == id) return false;
    }
    auto pos = std::find_if(items_.begin(), items_.end(), [&](const Candidate& c) {
      return closer(dist, id, c.dist, c.id);
    });
    items_.insert(pos, Candidate{dist, id, true});
    if (items_.size() > capacity_) items_.pop_back();
    return true;
  }

  std::vector<Candidate>& items() { return items_; }
  const std::vector<Candidate>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Candidate> items_;
};

}  // namespace

KnnGraph knn_exact(const Matrix& points, std::size_t k, std::size_t threads) {
  const std::size_t n = points.rows();
  check_k(n, k);
  KnnGraph g{n, k, std::vector<std::uint32_t>(n * k), std::vector<double>(n * k)};
  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    all.reserve(n - 1);
    const auto pi = points.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      all.emplace_back(squared_distance(pi, points.row(j)), static_cast<std::uint32_t>(j));
    }
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
    for (std::size_t r = 0; r < k; ++r) {
      g.indices[i * k + r] = all[r].second;
      g.distances[i * k + r] = std::sqrt(all[r].first);
    }
  });
  return g;
}

KnnGraph knn_descent(const Matrix& points, std::size_t k, std::uint64_t seed,
                     const DescentParams& params) {
  const std::size_t n = points.rows();
  check_k(n, k);
  if (n <= params.exact_below) return knn_exact(points, k);

  const std::size_t pool = std::min(n - 1, k + params.pool_extra);
  const auto sample_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(params.sample_rate * pool));
  std::mt19937_64 rng(seed);

  auto dist = [&](std::uint32_t a, std::uint32_t b) {
    return squared_distance(points.row(a), points.row(b));
  };

  std::vector<CandidateList> lists(n, CandidateList(pool));
  {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    for (std::size_t i = 0; i < n; ++i) {
      while (lists[i].items().size() < pool) {
        const auto j = pick(rng);
        if (j == i) continue;
        lists[i].insert(dist(static_cast<std::uint32_t>(i), j), j);
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> fresh(n), old(n), rev_fresh(n), rev_old(n);
  for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      fresh[i].clear();
      old[i].clear();
      rev_fresh[i].clear();
      rev_old[i].clear();
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> fresh_pos;
      for (std::size_t p = 0; p < lists[i].items().size(); ++p) {
        auto& c = lists[i].items()[p];
        if (c.fresh) {
          fresh_pos.push_back(p);
        } else {
          old[i].push_back(c.id);
        }
      }
      std::shuffle(fresh_pos.begin(), fresh_pos.end(), rng);
      if (fresh_pos.size() > sample_size) fresh_pos.resize(sample_size);
      for (auto p : fresh_pos) {
        auto& c = lists[i].items()[p];
        c.fresh = false;
        fresh[i].push_back(c.id);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (auto j : fresh[i]) rev_fresh[j].push_back(static_cast<std::uint32_t>(i));
      for (auto j : old[i]) rev_old[j].push_back(static_cast<std::uint32_t>(i));
    }

    std::size_t updates = 0;
    std::vector<std::uint32_t> joined_fresh;
    std::vector<std::uint32_t> joined_old;
    for (std::size_t i = 0; i < n; ++i) {
      joined_fresh = fresh[i];
      joined_old = old[i];
      auto add_sample = [&](std::vector<std::uint32_t>& rev, std::vector<std::uint32_t>& into) {
        std::shuffle(rev.begin(), rev.end(), rng);
        if (rev.size() > sample_size) rev.resize(sample_size);
        into.insert(into.end(), rev.begin(), rev.end());
      };
      add_sample(rev_fresh[i], joined_fresh);
      add_sample(rev_old[i], joined_old);
      std::sort(joined_fresh.begin(), joined_fresh.end());
      joined_fresh.erase(std::unique(joined_fresh.begin(), joined_fresh.end()), joined_fresh.end());
      std::sort(joined_old.begin(), joined_old.end());
      joined_old.erase(std::unique(joined_old.begin(), joined_old.end()), joined_old.end());

      auto join = [&](std::uint32_t a, std::uint32_t b) {
        if (a == b) return;
        const double d = dist(a, b);
        if (lists[a].insert(d, b)) ++updates;
        if (lists[b].insert(d, a)) ++updates;
      };
      for (std::size_t x = 0; x < joined_fresh.size(); ++x) {
        for (std::size_t y = x + 1; y < joined_fresh.size(); ++y) {
          join(joined_fresh[x], joined_fresh[y]);
        }
        for (auto o : joined_old) join(joined_fresh[x], o);
      }
    }
    if (static_cast<double>(updates) <
        params.termination * static_cast<double>(n) * static_cast<double>(pool)) {
      break;
    }
  }

  KnnGraph g{n, k, std::vector<std::uint32_t>(n * k), std::vector<double>(n * k)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& items = lists[i].items();
    for (std::size_t r = 0; r < k; ++r) {
      g.indices[i * k + r] = items[r].id;
      g.distances[i * k + r] = std::sqrt(items[r].dist);
    }
  }
  return g;
}

KnnGraph build_knn(const Matrix& points, std::size_t k, std::uint64_t seed,
                   std::size_t threads) {
  if (points.rows() < kDescentThreshold) return knn_exact(points, k, threads);
  return knn_descent(points, k, seed);
}

double knn_recall(const KnnGraph& approx, const KnnGraph& exact) {
  if (approx.n != exact.n || approx.k != exact.k) {
    throw InputError("recall needs graphs of equal shape");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < exact.n; ++i) {
    const auto a = approx.neighbors(i);
    for (auto j : exact.neighbors(i)) {
      if (std::find(a.begin(), a.end(), j) != a.end()) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(exact.n * exact.k);
}

void write_knn_csv(std::ostream& out, const KnnGraph& g) {
  out << "i,rank,j,distance\n";
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t r = 0; r < g.k; ++r) {
      out << i << ',' << r << ',' << g.indices[i * g.k + r] << ','
          << csv::format(g.distances[i * g.k + r]) << '\n';
    }
  }
}

}  // namespace vocspace
