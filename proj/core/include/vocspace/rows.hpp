#pragma once

#include <vector>

#include "vocspace/matrix.hpp"

namespace vocspace {

/// A reduced point set plus the slot each original row maps to.
struct CanonicalRows {
  Matrix rows;
  std::vector<std::size_t> slot;  // original row -> row of `rows`

  // Expands per-slot results (one row per entry of `rows`) back to input order.
  Matrix expand(const Matrix& per_slot) const;
};

// Stable lexicographic order of the rows of m.
std::vector<std::size_t> lexicographic_order(const Matrix& m);

/// sorted: slots follow lexicographic row order instead of input order.
/// dedup: exactly equal rows share one slot.
CanonicalRows canonicalize(const Matrix& m, bool sorted, bool dedup);

}  // namespace vocspace
