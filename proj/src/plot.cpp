#include "quadric/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "quadric/common.hpp"

namespace quadric {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

bool has(const CsvTable& t, const std::string& c) {
  return std::find(t.header.begin(), t.header.end(), c) != t.header.end();
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", log ? std::pow(10.0, v) : v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("csv: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("csv: empty input");
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != t.header.size()) throw InvalidArgument("csv: ragged row '" + line + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_csv(in);
}

PlotSpec default_plot_spec(const CsvTable& t) {
  if (has(t, "avg_sharp") && has(t, "P"))
    return {"P", "avg_sharp", has(t, "base") ? "base" : "", true, true, true, "|Sigma(P) / N_F(P)|, sharp cutoff"};
  if (has(t, "abs_sigma") && has(t, "series"))
    return {"P", "abs_sigma", "series", true, true, true, "|Sigma(P)|, smooth weight"};
  if (has(t, "ratio") && has(t, "q")) return {"q", "ratio", "", false, false, false, "|S_q| / q^(n/2)"};
  if (t.header.size() < 2) throw InvalidArgument("csv: need at least two columns to plot");
  return {t.header[0], t.header[1], "", false, false, false, t.header[1] + " against " + t.header[0]};
}

std::string render_svg(const CsvTable& t, const PlotSpec& spec) {
  const std::size_t xi = t.column(spec.x), yi = t.column(spec.y);
  const std::size_t gi = spec.group.empty() ? 0 : t.column(spec.group);
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& r : t.rows) {
    double x, y;
    try {
      x = std::stod(r[xi]);
      y = std::stod(r[yi]);
    } catch (const std::logic_error&) {
      continue;
    }
    if (spec.abs_y) y = std::abs(y);
    if ((spec.log_x && !(x > 0)) || (spec.log_y && !(y > 0))) continue;  // not representable on log axes
    if (spec.log_x) x = std::log10(x);
    if (spec.log_y) y = std::log10(y);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    series[spec.group.empty() ? "" : r[gi]].emplace_back(x, y);
  }
  if (series.empty()) throw InvalidArgument("plot: no plottable points");
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (auto& [k, pts] : series) {
    std::sort(pts.begin(), pts.end());
    for (const auto& [x, y] : pts) x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double W = 640, Hh = 420, L = 70, R = 150, T = 40, Bm = 50;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return Hh - Bm - (y - y0) / (y1 - y0) * (Hh - T - Bm); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << Hh << "\" viewBox=\"0 0 " << W
    << ' ' << Hh << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << spec.title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << Hh - Bm << "\" x2=\"" << W - R << "\" y2=\"" << Hh - Bm << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << Hh - Bm << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    s << "<text x=\"" << num(sx(xv)) << "\" y=\"" << Hh - Bm + 16 << "\" text-anchor=\"middle\">"
      << tick_label(xv, spec.log_x) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv, spec.log_y)
      << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << Hh - 12 << "\" text-anchor=\"middle\">" << spec.x
    << (spec.log_x ? " (log)" : "") << "</text>\n";
  s << "<text x=\"16\" y=\"" << (T + Hh - Bm) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + Hh - Bm) / 2 << ")\">" << spec.y << (spec.log_y ? " (log)" : "") << "</text>\n";
  std::size_t c = 0;
  for (const auto& [name, pts] : series) {
    const char* col = kColors[c % (sizeof kColors / sizeof *kColors)];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) s << num(sx(x)) << ',' << num(sy(y)) << ' ';
    s << "\"/>\n";
    for (const auto& [x, y] : pts)
      s << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"2.5\" fill=\"" << col << "\"/>\n";
    if (!name.empty()) {
      const double ly = T + 14.0 * static_cast<double>(c);
      s << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
      s << "<text x=\"" << W - R + 34 << "\" y=\"" << ly + 4 << "\">" << spec.group << ' ' << name << "</text>\n";
    }
    ++c;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace quadric
