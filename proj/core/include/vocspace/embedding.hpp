#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "vocspace/corpus.hpp"
#include "vocspace/matrix.hpp"

namespace vocspace {

/// 2-D coordinates aligned row by row with clip metadata.
struct Embedding {
  std::vector<ClipInfo> info;
  Matrix coords;  // info.size() x 2

  std::size_t size() const { return info.size(); }
};

inline constexpr std::string_view kEmbeddingHeader =
    "clip_id,recording_id,infant_id,age_months,class,x,y";

std::string serialize_embedding(const Embedding& e);
Embedding parse_embedding(std::istream& in, std::string_view origin);

}  // namespace vocspace
