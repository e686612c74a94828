#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hamnet::nn {

/// Stratified k-fold partition of [0, labels.size()). Within every class the
/// members are shuffled with `seed` and dealt round-robin, continuing from
/// the fold where the previous class stopped, so each fold holds floor or
/// ceil of (class size / k) of every class. Fold contents are sorted.
std::vector<std::vector<std::size_t>> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed);

}  // namespace hamnet::nn
