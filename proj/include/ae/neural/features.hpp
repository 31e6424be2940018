#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ae/error.hpp"

namespace ae::nn {

/// Sparse input vector with strictly increasing indices.
struct SparseVec {
  std::vector<std::uint32_t> idx;
  std::vector<double> val;

  std::size_t nnz() const { return idx.size(); }
  double norm() const {
    double s = 0.0;
    for (double v : val) s += v * v;
    return std::sqrt(s);
  }
  bool operator==(const SparseVec&) const = default;
};

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Hashed bag of words over the last few rendered state texts. Each frame
/// position salts the hash so the same word in different frames lands in
/// different buckets (with high probability).
class FeatureEncoder {
 public:
  static constexpr std::size_t kFrames = 4;
  using Frames = std::array<std::string, kFrames>;  // oldest first

  explicit FeatureEncoder(std::size_t hash_dim = 512, std::string pad_token = "<null>")
      : dim_(hash_dim), pad_(std::move(pad_token)) {
    if (hash_dim == 0) throw ConfigError("FeatureEncoder: hash_dim must be positive");
  }

  std::size_t dim() const { return dim_; }

  std::uint32_t bucket(std::size_t frame, std::string_view token) const {
    const char salt[2] = {static_cast<char>('0' + frame), '\x1f'};
    const auto h = fnv1a(token, fnv1a(std::string_view(salt, 2)));
    return static_cast<std::uint32_t>(h % dim_);
  }

  /// Encode frames; the result is L2-normalized unless every frame is empty.
  SparseVec encode(const Frames& frames) const {
    std::map<std::uint32_t, double> acc;
    for (std::size_t f = 0; f < kFrames; ++f) {
      const std::string& text = frames[f];
      std::size_t i = 0;
      while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ') ++j;
        if (j > i) {
          const std::string_view tok(text.data() + i, j - i);
          if (tok != pad_) acc[bucket(f, tok)] += 1.0;
        }
        i = j;
      }
    }
    SparseVec out;
    double ss = 0.0;
    for (const auto& [k, v] : acc) {
      out.idx.push_back(k);
      out.val.push_back(v);
      ss += v * v;
    }
    if (ss > 0.0) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& v : out.val) v *= inv;
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::string pad_;
};

/// Sliding window of the most recent state texts.
class FrameHistory {
 public:
  void reset(const std::string& first) {
    frames_.fill(std::string{});
    frames_.back() = first;
  }
  void push(const std::string& text) {
    for (std::size_t i = 0; i + 1 < frames_.size(); ++i) frames_[i] = std::move(frames_[i + 1]);
    frames_.back() = text;
  }
  const FeatureEncoder::Frames& frames() const { return frames_; }

 private:
  FeatureEncoder::Frames frames_{};
};

}  // namespace ae::nn
