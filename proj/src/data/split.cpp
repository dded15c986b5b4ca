#include "crowdloc/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "crowdloc/common/error.hpp"

namespace crowdloc::data {

SplitIndices split_indices(std::size_t n, std::uint64_t seed, double train_fraction) {
  check(n >= 5, ErrorKind::invalid_argument, "split_dataset needs at least 5 patches");
  check(train_fraction > 0.0 && train_fraction < 1.0, ErrorKind::invalid_argument,
        "train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(n)));
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return out;
}

}  // namespace crowdloc::data
