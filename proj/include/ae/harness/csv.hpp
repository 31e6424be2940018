#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ae/error.hpp"
#include "ae/harness/records.hpp"

namespace ae {

inline constexpr const char* kCsvHeader =
    "seed,episode,global_step,train_return,eval_return,length,mean_admissible,eliminated_valid";

/// Shortest round-trip decimal form, so values re-read bit-exactly.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv_row(std::ostream& os, const EpisodeRecord& r) {
  os << r.seed << ',' << r.episode << ',' << r.global_step << ',' << format_double(r.train_return) << ','
     << (r.eval_return ? format_double(*r.eval_return) : std::string{}) << ',' << r.length << ','
     << format_double(r.mean_admissible) << ',' << r.eliminated_valid << '\n';
}

inline void write_csv(const std::string& path, const std::vector<EpisodeRecord>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << kCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(os, r);
  if (!os) throw Error("write failed: " + path);
}

namespace detail {

template <typename T>
T parse_field(const std::string& s, const std::string& where) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw Error(where + ": cannot parse '" + s + "'");
  return v;
}

}  // namespace detail

inline std::vector<EpisodeRecord> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error(path + ": unexpected header");
  std::vector<EpisodeRecord> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 8) throw Error(where + ": expected 8 fields");
    EpisodeRecord r;
    r.seed = detail::parse_field<std::uint64_t>(f[0], where);
    r.episode = detail::parse_field<std::uint64_t>(f[1], where);
    r.global_step = detail::parse_field<std::uint64_t>(f[2], where);
    r.train_return = detail::parse_field<double>(f[3], where);
    if (!f[4].empty()) r.eval_return = detail::parse_field<double>(f[4], where);
    r.length = detail::parse_field<std::uint64_t>(f[5], where);
    r.mean_admissible = detail::parse_field<double>(f[6], where);
    r.eliminated_valid = detail::parse_field<std::uint64_t>(f[7], where);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ae
