#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ae/error.hpp"

namespace ae::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

/// Little-endian raw writer; doubles and floats are written bit-for-bit.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void magic(std::string_view tag, std::uint32_t version) {
    os_.write(tag.data(), static_cast<std::streamsize>(tag.size()));
    u32(version);
  }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  template <typename Derived>
  void matrix(const Eigen::PlainObjectBase<Derived>& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    using Scalar = typename Derived::Scalar;
    // Column-major, as Eigen stores it.
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(Scalar));
  }
  void check() const {
    if (!os_) throw Error("checkpoint write failed");
  }

 private:
  void raw(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}

  std::uint32_t magic(std::string_view tag) {
    std::string got(tag.size(), '\0');
    raw(got.data(), got.size());
    if (got != tag) throw Error("checkpoint: bad magic, expected '" + std::string(tag) + "'");
    return u32();
  }
  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  std::string str() {
    const auto n = u64();
    if (n > (1u << 30)) throw Error("checkpoint: implausible string length");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  template <typename MatrixType>
  MatrixType matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (rows > (1u << 24) || cols > (1u << 24)) throw Error("checkpoint: implausible matrix shape");
    MatrixType m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(typename MatrixType::Scalar));
    return m;
  }

 private:
  void raw(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is_) throw Error("checkpoint: truncated input");
  }
  std::istream& is_;
};

}  // namespace ae::io
