#include "procurl/charts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "procurl/errors.hpp"

namespace procurl {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, bool& ok) {
  if (s.empty() || s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  ok = ok && used == s.size();
  return v;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Round-ish tick spacing covering [lo, hi] with about five ticks.
double tick_step(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::vector<MetricRow> read_metrics_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) throw ConfigError(source + ": row 1: unexpected header '" + line + "'");
  std::vector<MetricRow> rows;
  for (long row_no = 2; std::getline(in, line); ++row_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6) {
      throw ConfigError(source + ": row " + std::to_string(row_no) + ": expected 6 fields, got " +
                        std::to_string(cells.size()));
    }
    MetricRow r;
    bool ok = true;
    const double seed = parse_number(cells[0], ok);
    const double steps = parse_number(cells[1], ok);
    r.mean_target_return = parse_number(cells[2], ok);
    r.mean_distance_to_target = parse_number(cells[3], ok);
    r.strategy = cells[4];
    r.wall_time_ms = parse_number(cells[5], ok);
    if (!ok || !std::isfinite(seed) || !std::isfinite(steps) || seed < 0 || r.strategy.empty()) {
      throw ConfigError(source + ": row " + std::to_string(row_no) + ": malformed value");
    }
    r.seed = static_cast<std::uint64_t>(seed);
    r.env_steps = static_cast<long>(steps);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::map<std::string, std::vector<BandPoint>> aggregate_metric(const std::vector<MetricRow>& rows,
                                                               double MetricRow::*metric, int window) {
  // strategy -> seed -> ordered snapshots
  std::map<std::string, std::map<std::uint64_t, std::vector<const MetricRow*>>> grouped;
  for (const auto& r : rows) grouped[r.strategy][r.seed].push_back(&r);

  std::map<std::string, std::vector<BandPoint>> out;
  for (const auto& [strategy, seeds] : grouped) {
    std::vector<std::vector<double>> xs, ys;
    for (const auto& [seed, snaps] : seeds) {
      std::vector<double> x, y;
      for (std::size_t k = 0; k < snaps.size(); ++k) {
        double sum = 0.0;
        int count = 0;
        for (int j = 0; j < window && static_cast<int>(k) - j >= 0; ++j) {
          const double v = snaps[k - static_cast<std::size_t>(j)]->*metric;
          if (std::isfinite(v)) {
            sum += v;
            ++count;
          }
        }
        x.push_back(static_cast<double>(snaps[k]->env_steps));
        y.push_back(count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN());
      }
      xs.push_back(std::move(x));
      ys.push_back(std::move(y));
    }
    std::size_t len = 0;
    for (const auto& y : ys) len = std::max(len, y.size());
    auto& curve = out[strategy];
    for (std::size_t k = 0; k < len; ++k) {
      std::vector<double> vals;
      double xsum = 0.0;
      int xn = 0;
      for (std::size_t s = 0; s < ys.size(); ++s) {
        if (k >= ys[s].size()) continue;
        xsum += xs[s][k];
        ++xn;
        if (std::isfinite(ys[s][k])) vals.push_back(ys[s][k]);
      }
      if (vals.empty()) continue;
      BandPoint p;
      p.x = xsum / xn;
      p.n = static_cast<int>(vals.size());
      for (double v : vals) p.mean += v;
      p.mean /= p.n;
      if (p.n > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - p.mean) * (v - p.mean);
        p.std_error = std::sqrt(ss / (p.n - 1)) / std::sqrt(static_cast<double>(p.n));
      }
      curve.push_back(p);
    }
    if (curve.empty()) out.erase(strategy);
  }
  return out;
}

std::string render_svg(const std::string& title, const std::string& y_label,
                       const std::map<std::string, std::vector<BandPoint>>& series) {
  constexpr double W = 720, H = 440, L = 70, R = 170, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& [name, pts] : series) {
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.mean - p.std_error);
      y1 = std::max(y1, p.mean + p.std_error);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";

  const double xt = tick_step(x0, x1);
  for (double v = std::ceil(x0 / xt) * xt; v <= x1 + 1e-9 * xt; v += xt) {
    s << "<line x1=\"" << sx(v) << "\" y1=\"" << T << "\" x2=\"" << sx(v) << "\" y2=\"" << H - B
      << "\" stroke=\"#e5e5e5\"/>\n";
    s << "<text x=\"" << sx(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }
  const double yt = tick_step(y0, y1);
  for (double v = std::ceil(y0 / yt) * yt; v <= y1 + 1e-9 * yt; v += yt) {
    s << "<line x1=\"" << L << "\" y1=\"" << sy(v) << "\" x2=\"" << W - R << "\" y2=\"" << sy(v)
      << "\" stroke=\"#e5e5e5\"/>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">env_steps</text>\n";
  s << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(y_label) << " (mean ±1 SE)</text>\n";

  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
    s << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& p : pts) s << sx(p.x) << ',' << sy(p.mean + p.std_error) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) s << sx(it->x) << ',' << sy(it->mean - it->std_error) << ' ';
    s << "\"/>\n";
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) s << sx(p.x) << ',' << sy(p.mean) << ' ';
    s << "\"/>\n";
    const double ly = T + 14 + 20.0 * static_cast<double>(idx);
    s << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    s << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(name) << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> emit_charts(const std::vector<std::filesystem::path>& metrics_files,
                                               const std::filesystem::path& out_dir, std::ostream* warn) {
  if (warn == nullptr) warn = &std::cerr;
  std::vector<MetricRow> rows;
  for (const auto& path : metrics_files) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    auto part = read_metrics_csv(in, path.string());
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::filesystem::create_directories(out_dir);

  struct Metric {
    const char* column;
    const char* title;
    double MetricRow::*member;
  };
  const Metric metrics[] = {
      {"mean_target_return", "Mean return on the held-out target set", &MetricRow::mean_target_return},
      {"mean_distance_to_target", "Distance of selected tasks to the target", &MetricRow::mean_distance_to_target},
      {"wall_time_ms", "Wall time", &MetricRow::wall_time_ms},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& m : metrics) {
    bool any = false;
    for (const auto& r : rows) {
      const double v = r.*(m.member);
      // An all-zero wall_time column means timing was not recorded.
      if (std::isfinite(v) && (m.member != &MetricRow::wall_time_ms || v != 0.0)) any = true;
    }
    if (!any) {
      *warn << "warning: column " << m.column << " has no values; chart omitted\n";
      continue;
    }
    const auto series = aggregate_metric(rows, m.member, 2);
    const auto path = out_dir / (std::string(m.column) + ".svg");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << render_svg(m.title, m.column, series);
    written.push_back(path);
  }
  return written;
}

}  // namespace procurl
