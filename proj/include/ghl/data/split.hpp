#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/rng.hpp"
#include "ghl/sample.hpp"

namespace ghl {

struct SplitResult {
  Dataset train;
  Dataset val;
};

/// Uniform random partition with |train| = round(ratio * N). Both parts keep
/// the input order of their samples.
inline SplitResult split(const Dataset& samples, double ratio, std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "cannot split an empty dataset");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidConfig, "split ratio must be in (0, 1)");
  const std::size_t n = samples.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = true;

  SplitResult out;
  out.train.reserve(n_train);
  out.val.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? out.train : out.val).push_back(samples[i]);
  return out;
}

}  // namespace ghl
