#pragma once

#include <cstdint>
#include <vector>

namespace crowdloc::data {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Seeded shuffle; |train| = round(train_fraction * n). Requires n >= 5.
SplitIndices split_indices(std::size_t n, std::uint64_t seed, double train_fraction = 0.8);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& items, std::uint64_t seed,
                                                        double train_fraction = 0.8) {
  const SplitIndices idx = split_indices(items.size(), seed, train_fraction);
  std::pair<std::vector<T>, std::vector<T>> out;
  for (auto i : idx.train) out.first.push_back(items[i]);
  for (auto i : idx.val) out.second.push_back(items[i]);
  return out;
}

}  // namespace crowdloc::data
