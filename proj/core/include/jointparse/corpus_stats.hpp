#pragma once

#include <map>
#include <span>

#include "jointparse/tree.hpp"

namespace jointparse {

struct CorpusStats {
  int trees = 0;
  long tokens = 0;
  int min_length = 0;
  int max_length = 0;
  int bucket_width = 100;
  std::map<int, int> histogram;  // bucket start -> number of trees

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(std::span<const JointTree> treebank, int bucket_width = 100);

}  // namespace jointparse
