#pragma once

#include <cstdint>
#include <vector>

#include "model/record.hpp"

namespace thg::model {

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

struct DatasetSplit {
  std::vector<QuestionRecord> train;
  std::vector<QuestionRecord> validation;
  std::vector<QuestionRecord> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then consecutive slices of the requested sizes. Each slice
// keeps the input order of its members.
DatasetSplit split_dataset(const std::vector<QuestionRecord>& records, SplitCounts counts,
                           std::uint64_t seed);

}  // namespace thg::model
