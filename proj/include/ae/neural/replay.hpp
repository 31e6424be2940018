#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <random>
#include <unordered_set>
#include <vector>

#include "ae/error.hpp"
#include "ae/neural/features.hpp"

namespace ae::nn {

using FeaturePtr = std::shared_ptr<const SparseVec>;

struct Transition {
  FeaturePtr s;
  std::size_t action = 0;
  double reward = 0.0;
  double elim = 0.0;
  FeaturePtr s_next;
  bool terminal = false;  // true end of the task; horizon cut-offs still bootstrap
};

/// Fixed-capacity ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1u << 16));
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const Transition& operator[](std::size_t i) const { return data_[i]; }

  void push(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  /// m distinct indices drawn uniformly (Floyd's algorithm), in draw order.
  template <typename Rng>
  std::vector<std::size_t> sample_indices(std::size_t m, Rng& rng) const {
    const std::size_t n = data_.size();
    if (m == 0 || m > n) throw InvalidArgument("ReplayBuffer: cannot sample " + std::to_string(m) + " of " + std::to_string(n));
    std::vector<std::size_t> out;
    out.reserve(m);
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = n - m; j < n; ++j) {
      const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
      if (chosen.insert(t).second) {
        out.push_back(t);
      } else {
        chosen.insert(j);
        out.push_back(j);
      }
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

}  // namespace ae::nn
