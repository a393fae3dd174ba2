#include "svg.hpp"

#include "vino/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace vino::plot {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten, about `count` steps across [lo, hi]
double nice_step(double lo, double hi, int count) {
  const double raw = (hi - lo) / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= d;
    hi += d;
  }
}

}  // namespace

std::string render(const Chart& c) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : c.series) {
    if (s.x.size() == 0) continue;
    x0 = std::min(x0, s.x.minCoeff());
    x1 = std::max(x1, s.x.maxCoeff());
    y0 = std::min(y0, s.y.minCoeff());
    y1 = std::max(y1, s.y.maxCoeff());
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  pad_range(x0, x1);
  pad_range(y0, y1);
  const double ystep = nice_step(y0, y1, 5);
  y0 = std::floor(y0 / ystep) * ystep;
  y1 = std::ceil(y1 / ystep) * ystep;
  const double xstep = nice_step(x0, x1, 6);

  const double left = 80, right = 20, top = 40, bottom = 60;
  const double w = c.width - left - right, h = c.height - top - bottom;
  const auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  const auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * h; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(c.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(c.title)
    << "</text>\n";

  for (double t = std::ceil(y0 / ystep) * ystep; t <= y1 + 1e-9 * ystep; t += ystep) {
    const double v = std::abs(t) < 1e-12 * ystep ? 0.0 : t;
    o << "<line x1=\"" << px(left) << "\" x2=\"" << px(left + w) << "\" y1=\"" << px(sy(v)) << "\" y2=\"" << px(sy(v))
      << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << px(left - 6) << "\" y=\"" << px(sy(v) + 4) << "\" text-anchor=\"end\">" << num(v)
      << "</text>\n";
  }
  for (double t = std::ceil(x0 / xstep) * xstep; t <= x1 + 1e-9 * xstep; t += xstep) {
    const double v = std::abs(t) < 1e-12 * xstep ? 0.0 : t;
    o << "<line x1=\"" << px(sx(v)) << "\" x2=\"" << px(sx(v)) << "\" y1=\"" << px(top) << "\" y2=\"" << px(top + h)
      << "\" stroke=\"#f0f0f0\"/>\n";
    o << "<text x=\"" << px(sx(v)) << "\" y=\"" << px(top + h + 18) << "\" text-anchor=\"middle\">" << num(v)
      << "</text>\n";
  }
  o << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(w) << "\" height=\"" << px(h)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << px(left + w / 2) << "\" y=\"" << px(c.height - 15.0) << "\" text-anchor=\"middle\">"
    << escape(c.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << px(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(c.y_label) << "</text>\n";

  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const Series& s = c.series[k];
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) o << " stroke-dasharray=\"6,4\"";
    o << " points=\"";
    for (Eigen::Index i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
    o << "\"/>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(k);
    o << "<line x1=\"" << px(left + w - 150) << "\" x2=\"" << px(left + w - 125) << "\" y1=\"" << px(ly - 4)
      << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    o << "<text x=\"" << px(left + w - 120) << "\" y=\"" << px(ly) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write(const std::string& path, const Chart& chart) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << render(chart);
}

}  // namespace vino::plot
