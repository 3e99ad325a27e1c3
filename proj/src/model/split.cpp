#include "model/split.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/random.hpp"

namespace thg::model {

DatasetSplit split_dataset(const std::vector<QuestionRecord>& records, SplitCounts counts,
                           std::uint64_t seed) {
  if (counts.train + counts.validation + counts.test != records.size()) {
    fail(ErrorCode::InvalidArgument,
         "split counts sum to " +
             std::to_string(counts.train + counts.validation + counts.test) + " but there are " +
             std::to_string(records.size()) + " records");
  }
  const auto perm = seeded_permutation(records.size(), seed);

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                 perm.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(idx.begin(), idx.end());
    std::vector<QuestionRecord> out;
    out.reserve(count);
    for (std::size_t i : idx) out.push_back(records[i]);
    return out;
  };

  DatasetSplit split;
  split.seed = seed;
  split.train = take(0, counts.train);
  split.validation = take(counts.train, counts.validation);
  split.test = take(counts.train + counts.validation, counts.test);
  return split;
}

}  // namespace thg::model
