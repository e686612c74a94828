#include "hamnet/nn/kfold.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "hamnet/error.hpp"
#include "hamnet/rng.hpp"

namespace hamnet::nn {

std::vector<std::vector<std::size_t>> kfold_split(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  require(k >= 2, "k must be at least 2");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      fail(ErrorKind::Validation, "class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                                      " member(s), fewer than k=" + std::to_string(k));
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& [label, members] : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    for (auto idx : members) {
      folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace hamnet::nn
