#include "vocspace/rows.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace vocspace {
namespace {

bool rows_equal(const Matrix& m, std::size_t a, std::size_t b) {
  const auto ra = m.row(a);
  const auto rb = m.row(b);
  return std::equal(ra.begin(), ra.end(), rb.begin());
}

}  // namespace

Matrix CanonicalRows::expand(const Matrix& per_slot) const {
  Matrix out(slot.size(), per_slot.cols());
  for (std::size_t i = 0; i < slot.size(); ++i) {
    std::ranges::copy(per_slot.row(slot[i]), out.row(i).begin());
  }
  return out;
}

std::vector<std::size_t> lexicographic_order(const Matrix& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = m.row(a);
    const auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return order;
}

CanonicalRows canonicalize(const Matrix& m, bool sorted, bool dedup) {
  const std::size_t n = m.rows();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();

  std::vector<std::size_t> order;
  if (sorted || dedup) order = lexicographic_order(m);

  // representative[i]: first row in sorted order equal to row i.
  std::vector<std::size_t> representative(n);
  std::iota(representative.begin(), representative.end(), 0);
  if (dedup) {
    for (std::size_t p = 1; p < n; ++p) {
      if (rows_equal(m, order[p], order[p - 1])) {
        representative[order[p]] = representative[order[p - 1]];
      }
    }
  }

  std::vector<std::size_t> sequence;
  if (sorted) {
    sequence = order;
  } else {
    sequence.resize(n);
    std::iota(sequence.begin(), sequence.end(), 0);
  }

  CanonicalRows out;
  out.slot.assign(n, kUnset);
  std::vector<std::size_t> rep_slot(n, kUnset);
  std::vector<std::size_t> source;
  for (auto i : sequence) {
    auto& s = rep_slot[representative[i]];
    if (s == kUnset) {
      s = source.size();
      source.push_back(i);
    }
    out.slot[i] = s;
  }
  out.rows = Matrix(source.size(), m.cols());
  for (std::size_t s = 0; s < source.size(); ++s) {
    std::ranges::copy(m.row(source[s]), out.rows.row(s).begin());
  }
  return out;
}

}  // namespace vocspace
