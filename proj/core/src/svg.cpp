// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include "stopaudit/error.hpp"

namespace stopaudit {

namespace {

constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 56;

double parse_number(const std::string& s) {
  double v = std::numeric_limits<double>::quiet_NaN();
  if (s == "NA" || s.empty()) return v;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorKind::kData, "not a number: \"" + s + "\"");
  }
  return v;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isnan(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Pads by 5% and gives a flat range some height.
  Range padded() const {
    Range r = *this;
    if (!(r.lo <= r.hi)) return {0.0, 1.0};
    const double span = r.hi - r.lo;
    const double pad = span > 0 ? span * 0.05 : std::max(std::abs(r.hi) * 0.05, 0.05);
    r.lo -= pad;
    r.hi += pad;
    return r;
  }
};

// Maps data y into a pixel band [top, bottom].
struct YScale {
  Range r;
  double top, bottom;
  double operator()(double v) const {
    return bottom - (v - r.lo) / (r.hi - r.lo) * (bottom - top);
  }
};

class Canvas {
 public:
  Canvas(double w, double h) : w_(w), h_(h) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
         << num(h) << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h)
         << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void title(std::string_view t) {
    if (t.empty()) return;
    out_ << "<text class=\"title\" x=\"" << num(w_ / 2) << "\" y=\"22\" text-anchor=\"middle\" "
         << "font-size=\"14\">" << esc(t) << "</text>\n";
  }

  void text(double x, double y, std::string_view t, std::string_view anchor = "middle") {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
         << "\">" << esc(t) << "</text>\n";
  }

  void y_axis(const YScale& y, double x) {
    out_ << "<line class=\"axis\" x1=\"" << num(x) << "\" y1=\"" << num(y.top) << "\" x2=\""
         << num(x) << "\" y2=\"" << num(y.bottom) << "\" stroke=\"#444\"/>\n";
    for (double v : {y.r.lo, (y.r.lo + y.r.hi) / 2, y.r.hi}) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      text(x - 6, y(v) + 4, buf, "end");
    }
  }

  std::ostringstream& raw() { return out_; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double w_, h_;
  std::ostringstream out_;
};

std::string gradient(double t) {
  if (std::isnan(t)) return "#888888";
  t = std::clamp(t, 0.0, 1.0);
  // blue (all NA to Black) to orange (all NA to white)
  const int r = static_cast<int>(std::lround(33 + t * (230 - 33)));
  const int g = static_cast<int>(std::lround(102 + t * (126 - 102)));
  const int b = static_cast<int>(std::lround(172 + t * (34 - 172)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string render_dcmr(const csv::Document& doc, const ChartOptions& opts) {
  const std::size_t bin = doc.column("bin"), target = doc.column("target"),
                    rate = doc.column("rate");
  std::vector<std::pair<std::string, double>> pts;
  for (const auto& row : doc.rows) {
    if (row[target] == opts.target) pts.emplace_back(row[bin], parse_number(row[rate]));
  }
  if (pts.empty()) throw Error(ErrorKind::kDomain, "no rows for target \"" + opts.target + "\"");

  const double w = 800, h = 400;
  Range r;
  for (const auto& p : pts) r.add(p.second);
  const YScale y{r.padded(), kTop, h - kBottom};
  Canvas c(w, h);
  c.title(opts.title);
  c.y_axis(y, kLeft);
  const double span = w - kLeft - kRight;
  const auto x_of = [&](std::size_t i) {
    return pts.size() == 1 ? kLeft + span / 2
                           : kLeft + 8 + (span - 16) * static_cast<double>(i) /
                                             static_cast<double>(pts.size() - 1);
  };
  c.raw() << "<g class=\"points\" fill=\"#2166ac\">\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::isnan(pts[i].second)) continue;
    c.raw() << "<circle cx=\"" << num(x_of(i)) << "\" cy=\"" << num(y(pts[i].second))
            << "\" r=\"3\"><title>" << esc(pts[i].first) << "</title></circle>\n";
  }
  c.raw() << "</g>\n";
  c.text(x_of(0), h - kBottom + 18, pts.front().first);
  if (pts.size() > 1) c.text(x_of(pts.size() - 1), h - kBottom + 18, pts.back().first);
  c.text(w / 2, h - 12, "bin");
  return c.finish();
}

std::string render_outcome(const csv::Document& doc, const ChartOptions& opts) {
  const std::size_t group = doc.column("group"), pw = doc.column("prop_white"),
                    disp = doc.column("disparity");
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> by_group;
  Range r;
  r.add(0.0);
  for (const auto& row : doc.rows) {
    auto [it, fresh] = by_group.try_emplace(row[group]);
    if (fresh) order.push_back(row[group]);
    const double d = parse_number(row[disp]);
    it->second.emplace_back(parse_number(row[pw]), d);
    r.add(d);
  }
  if (order.empty()) throw Error(ErrorKind::kDomain, "no allocation rows");

  const double band = std::max(24.0, 640.0 / static_cast<double>(order.size()));
  const double w = kLeft + kRight + band * static_cast<double>(order.size());
  const double h = 420;
  const YScale y{r.padded(), kTop, h - kBottom};
  Canvas c(w, h);
  c.title(opts.title);
  c.y_axis(y, kLeft);
  c.raw() << "<line class=\"zero\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y(0.0))
          << "\" x2=\"" << num(w - kRight) << "\" y2=\"" << num(y(0.0))
          << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t g = 0; g < order.size(); ++g) {
    const double x0 = kLeft + band * static_cast<double>(g);
    const double inner = band * 0.7;
    const double left = x0 + (band - inner) / 2;
    auto& pts = by_group[order[g]];
    c.raw() << "<g class=\"group\" data-group=\"" << esc(order[g]) << "\">\n";
    // Marks landing on the same pixel with the same color are drawn once.
    std::set<std::tuple<long, long, std::string>> seen;
    std::vector<double> ds;
    for (const auto& [p, d] : pts) {
      if (std::isnan(d)) continue;
      ds.push_back(d);
      const double x = std::isnan(p) ? x0 + band / 2 : left + p * inner;
      const std::string color = gradient(p);
      if (!seen.emplace(std::lround(x), std::lround(y(d)), color).second) continue;
      c.raw() << "<circle class=\"mark\" cx=\"" << num(x) << "\" cy=\"" << num(y(d))
              << "\" r=\"2\" fill=\"" << color << "\"/>\n";
    }
    if (!ds.empty()) {
      std::sort(ds.begin(), ds.end());
      const std::size_t n = ds.size();
      const double med = n % 2 ? ds[n / 2] : 0.5 * (ds[n / 2 - 1] + ds[n / 2]);
      c.raw() << "<line class=\"median\" x1=\"" << num(left) << "\" y1=\"" << num(y(med))
              << "\" x2=\"" << num(left + inner) << "\" y2=\"" << num(y(med))
              << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    c.raw() << "</g>\n";
    c.text(x0 + band / 2, h - kBottom + 16, order[g]);
  }
  c.text(w / 2, h - 12, "color: share of NA observations assigned to white");
  return c.finish();
}

std::string render_ate(const csv::Document& doc, const ChartOptions& opts) {
  const std::size_t plan = doc.column("plan"), pw = doc.column("p_white"),
                    rho = doc.column("rho"), naive = doc.column("naive"),
                    lower = doc.column("lower"), upper = doc.column("upper");
  struct Row {
    std::string category;
    double naive, lower, upper;
  };
  std::map<double, std::vector<Row>> panels;
  std::vector<std::string> categories;
  Range r;
  r.add(0.0);
  for (const auto& row : doc.rows) {
    std::string cat = row[plan];
    if (row[plan] == "random" || row[plan] == "proportion") cat += " " + row[pw];
    if (std::find(categories.begin(), categories.end(), cat) == categories.end()) {
      categories.push_back(cat);
    }
    Row v{cat, parse_number(row[naive]), parse_number(row[lower]), parse_number(row[upper])};
    r.add(v.naive);
    r.add(v.lower);
    r.add(v.upper);
    panels[parse_number(row[rho])].push_back(v);
  }
  if (panels.empty()) throw Error(ErrorKind::kDomain, "no bound rows");

  const double pw_px = 360, h = 400;
  const double w = kLeft + kRight + pw_px * static_cast<double>(panels.size());
  const YScale y{r.padded(), kTop + 16, h - kBottom - 40};
  Canvas c(w, h);
  c.title(opts.title);
  c.y_axis(y, kLeft);
  std::size_t k = 0;
  for (const auto& [rv, rows] : panels) {
    const double x0 = kLeft + pw_px * static_cast<double>(k++);
    const double step = (pw_px - 20) / static_cast<double>(categories.size());
    c.raw() << "<g class=\"panel\" data-rho=\"" << csv::format_double(rv) << "\">\n";
    c.raw() << "<rect x=\"" << num(x0 + 4) << "\" y=\"" << num(y.top) << "\" width=\""
            << num(pw_px - 8) << "\" height=\"" << num(y.bottom - y.top)
            << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
    c.raw() << "<line class=\"zero\" x1=\"" << num(x0 + 4) << "\" y1=\"" << num(y(0.0))
            << "\" x2=\"" << num(x0 + pw_px - 4) << "\" y2=\"" << num(y(0.0))
            << "\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>\n";
    c.text(x0 + pw_px / 2, y.top - 6, "rho = " + csv::format_double(rv));
    for (const Row& row : rows) {
      const auto idx = static_cast<double>(
          std::find(categories.begin(), categories.end(), row.category) - categories.begin());
      const double x = x0 + 10 + step * (idx + 0.5);
      if (!std::isnan(row.lower) && !std::isnan(row.upper)) {
        const double top = y(row.upper);
        c.raw() << "<rect class=\"interval\" x=\"" << num(x - 5) << "\" y=\"" << num(top)
                << "\" width=\"10\" height=\"" << num(std::max(1.0, y(row.lower) - top))
                << "\" fill=\"#92c5de\" fill-opacity=\"0.35\"/>\n";
      }
      if (!std::isnan(row.naive)) {
        c.raw() << "<circle class=\"naive\" cx=\"" << num(x) << "\" cy=\"" << num(y(row.naive))
                << "\" r=\"2.5\" fill=\"#b2182b\"/>\n";
      }
    }
    for (std::size_t i = 0; i < categories.size(); ++i) {
      const double x = x0 + 10 + step * (static_cast<double>(i) + 0.5);
      c.raw() << "<text x=\"" << num(x) << "\" y=\"" << num(y.bottom + 10)
              << "\" font-size=\"9\" transform=\"rotate(45 " << num(x) << ' '
              << num(y.bottom + 10) << ")\">" << esc(categories[i]) << "</text>\n";
    }
    c.raw() << "</g>\n";
  }
  return c.finish();
}

}  // namespace

std::string render_svg(const csv::Document& doc, ChartKind kind, const ChartOptions& opts) {
  if (doc.rows.empty()) throw Error(ErrorKind::kDomain, "nothing to render");
  switch (kind) {
    case ChartKind::kDcmr: return render_dcmr(doc, opts);
    case ChartKind::kOutcome: return render_outcome(doc, opts);
    case ChartKind::kAte: return render_ate(doc, opts);
  }
  throw Error(ErrorKind::kUsage, "unknown chart kind");
}

}  // namespace stopaudit
