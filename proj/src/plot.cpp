#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "frontflow/harness.hpp"

namespace frontflow {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;
};

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  std::stringstream hs(line);
  for (std::string h; std::getline(hs, h, ',');) t.header.push_back(h);
  t.cols.resize(t.header.size());
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (!std::getline(ls, cell, ',')) cell.clear();
      double v = NAN;
      if (!cell.empty() && cell != "nan") {
        try {
          v = std::stod(cell);
        } catch (const std::exception&) {
        }
      }
      t.cols[c].push_back(v);
    }
  }
  return t;
}

bool starts_with(const std::string& s, const std::string& p) { return s.compare(0, p.size(), p) == 0; }

// Columns worth drawing against the first one.
std::vector<std::size_t> series_columns(const std::string& stem, const Table& t) {
  std::vector<std::size_t> out;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (stem == "diagnostics") {
      if (h == "E") out.push_back(c);
    } else if (stem == "quantization") {
      if (h == "rel_err") out.push_back(c);
    } else if (h == "l" || h == "merging" || starts_with(h, "i_") || starts_with(h, "dag_") || starts_with(h, "d_min")) {
      continue;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

void write_svg(const fs::path& out, const std::string& title, const Table& t, const std::vector<std::size_t>& ys) {
  const double W = 720, H = 440, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  const auto& xs = t.cols[0];
  for (std::size_t c : ys)
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (std::isfinite(xs[i]) && std::isfinite(t.cols[c][i])) {
        x0 = std::min(x0, xs[i]);
        x1 = std::max(x1, xs[i]);
        y0 = std::min(y0, t.cols[c][i]);
        y1 = std::max(y1, t.cols[c][i]);
      }
  if (!std::isfinite(x0)) return;
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ofstream os(out);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << t.header[0] << "</text>\n";
  std::size_t n = 0;
  for (std::size_t c : ys) {
    const char* color = kColors[n++ % 8];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double y = t.cols[c][i];
      if (!std::isfinite(xs[i]) || !std::isfinite(y)) {
        pen = false;
        continue;
      }
      path += (pen ? " L" : " M") + fmt(px(xs[i])) + " " + fmt(py(y));
      pen = true;
    }
    if (!path.empty())
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\"/>\n";
    if (ys.size() <= 8)
      os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * n << "\" text-anchor=\"end\" fill=\"" << color << "\">"
         << t.header[c] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace

std::size_t plot_directory(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("plot: not a directory: " + dir);
  std::vector<fs::path> csvs;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") csvs.push_back(e.path());
  std::sort(csvs.begin(), csvs.end());
  std::size_t count = 0;
  for (const auto& p : csvs) {
    const Table t = read_csv(p);
    if (t.header.size() < 2 || t.cols[0].empty()) continue;
    const auto ys = series_columns(p.stem().string(), t);
    if (ys.empty()) continue;
    fs::path out = p;
    out.replace_extension(".svg");
    write_svg(out, fs::relative(p, dir).string(), t, ys);
    ++count;
  }
  return count;
}

}  // namespace frontflow
