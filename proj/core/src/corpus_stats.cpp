#include "jointparse/corpus_stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace jointparse {

CorpusStats corpus_stats(std::span<const JointTree> treebank, int bucket_width) {
  if (bucket_width < 1) throw std::invalid_argument("histogram bucket width must be positive");
  CorpusStats stats;
  stats.bucket_width = bucket_width;
  for (const auto& tree : treebank) {
    const int length = static_cast<int>(tree.tokens.size());
    stats.min_length = stats.trees == 0 ? length : std::min(stats.min_length, length);
    stats.max_length = stats.trees == 0 ? length : std::max(stats.max_length, length);
    ++stats.trees;
    stats.tokens += length;
    ++stats.histogram[(length / bucket_width) * bucket_width];
  }
  return stats;
}

}  // namespace jointparse
