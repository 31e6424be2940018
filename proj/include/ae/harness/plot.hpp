#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ae/error.hpp"
#include "ae/harness/csv.hpp"

namespace ae {

/// Centered moving average; near the ends the window shrinks to the
/// samples that exist. Index i averages [i - (w-1)/2, i + w/2].
inline std::vector<double> moving_average(const std::vector<double>& y, std::size_t window) {
  if (window == 0) throw InvalidArgument("moving_average: window must be at least 1");
  const std::size_t n = y.size();
  const std::size_t left = (window - 1) / 2, right = window / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= left ? i - left : 0;
    const std::size_t hi = std::min(n - 1, i + right);
    if (window == 1) {
      out[i] = y[i];
    } else {
      out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

enum class Metric { TrainReturn, EvalReturn };

/// One variant: a shared x axis and one y series per seed.
struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<std::vector<double>> seeds;
};

struct SmoothedSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> band;  // cross-seed std / 3 of the smoothed curves
};

/// Build a series from per-seed rows. Train rows use the episode index as x;
/// eval rows use the global step.
inline Series make_series(const std::string& label, const std::vector<std::vector<EpisodeRecord>>& per_seed, Metric metric) {
  Series s;
  s.label = label;
  for (std::size_t k = 0; k < per_seed.size(); ++k) {
    std::vector<double> x, y;
    for (const auto& r : per_seed[k]) {
      if (metric == Metric::EvalReturn) {
        if (!r.eval_return) continue;
        x.push_back(static_cast<double>(r.global_step));
        y.push_back(*r.eval_return);
      } else {
        if (r.eval_return) continue;
        x.push_back(static_cast<double>(r.episode));
        y.push_back(r.train_return);
      }
    }
    if (k == 0) {
      s.x = x;
    } else if (x != s.x) {
      throw Error("series '" + label + "': seed " + std::to_string(k) + " does not share the x axis of seed 0");
    }
    s.seeds.push_back(std::move(y));
  }
  if (s.seeds.empty() || s.x.empty()) throw Error("series '" + label + "': no rows for the requested metric");
  return s;
}

inline SmoothedSeries smooth(const Series& s, std::size_t window) {
  SmoothedSeries out{s.label, s.x, {}, {}};
  std::vector<std::vector<double>> sm;
  for (const auto& y : s.seeds) sm.push_back(moving_average(y, window));
  const std::size_t n = s.x.size();
  const double k = static_cast<double>(sm.size());
  out.mean.assign(n, 0.0);
  out.band.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (const auto& y : sm) m += y[i];
    m /= k;
    double v = 0.0;
    for (const auto& y : sm) v += (y[i] - m) * (y[i] - m);
    out.mean[i] = m;
    out.band[i] = std::sqrt(v / k) / 3.0;
  }
  return out;
}

/// First x at which the smoothed mean reaches `level`, if any.
inline std::optional<double> first_crossing(const SmoothedSeries& s, double level) {
  for (std::size_t i = 0; i < s.mean.size(); ++i)
    if (s.mean[i] >= level) return s.x[i];
  return std::nullopt;
}

namespace detail {
inline std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}
}  // namespace detail

/// Mean line plus shaded band per series. Deterministic output.
inline std::string render_svg(const std::vector<SmoothedSeries>& series, const std::string& title, const std::string& xlabel,
                              const std::string& ylabel) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double W = 800, H = 500, ml = 70, mr = 20, mt = 40, mb = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.mean[i] - s.band[i]);
      y1 = std::max(y1, s.mean[i] + s.band[i]);
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) {
    y0 -= 1;
    y1 += 1;
  }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
     << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << detail::fmt(px(xv)) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::fmt(xv, 4) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << detail::fmt(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << detail::fmt(yv, 4) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
     << H / 2 << ")\">" << ylabel << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.mean[i] + s.band[i])) << ' ';
    for (std::size_t i = s.x.size(); i-- > 0;)
      os << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.mean[i] - s.band[i])) << ' ';
    os << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.mean[i])) << ' ';
    os << "\"/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
       << "\" stroke-width=\"3\"/>\n<text x=\"" << W - mr - 118 << "\" y=\"" << ly + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Long format: one row per (series, x).
inline std::string smoothed_csv(const std::vector<SmoothedSeries>& series) {
  std::ostringstream os;
  os << "label,x,mean,band\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << s.label << ',' << format_double(s.x[i]) << ',' << format_double(s.mean[i]) << ',' << format_double(s.band[i]) << '\n';
  return os.str();
}

}  // namespace ae
