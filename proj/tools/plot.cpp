#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sample_file.hpp"

namespace elastic::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanel = 300.0;
constexpr double kMargin = 40.0;
constexpr std::size_t kMaxMembers = 200;

std::string polyline(const Grid& grid, const Eigen::VectorXd& y, double lo, double hi, double top,
                     const std::string& style) {
  const double span = hi > lo ? hi - lo : 1.0;
  std::string pts;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = kMargin + grid[i] * (kWidth - 2.0 * kMargin);
    const double v = top + kPanel - kMargin - (y[static_cast<Eigen::Index>(i)] - lo) / span * (kPanel - 2.0 * kMargin);
    pts += format_double(std::round(x * 100.0) / 100.0) + "," + format_double(std::round(v * 100.0) / 100.0) + " ";
  }
  return "<polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

void write_band_csv(const std::filesystem::path& path, const PointwiseBand& band) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "t,dim,mean,lower,upper\n";
  for (Eigen::Index d = 0; d < band.mean.cols(); ++d) {
    for (Eigen::Index r = 0; r < band.mean.rows(); ++r) {
      out << format_double(band.grid[static_cast<std::size_t>(r)]) << ',' << d + 1 << ','
          << format_double(band.mean(r, d)) << ',' << format_double(band.lower(r, d)) << ','
          << format_double(band.upper(r, d)) << '\n';
    }
  }
}

void write_band_svg(const std::filesystem::path& path, const PointwiseBand& band,
                    const std::vector<Func>& members, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const Eigen::Index dims = band.mean.cols();
  const double height = kPanel * static_cast<double>(dims) + 30.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << escape(title)
      << "</text>\n";
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double top = 30.0 + kPanel * static_cast<double>(d);
    double lo = band.lower.col(d).minCoeff();
    double hi = band.upper.col(d).maxCoeff();
    const std::size_t shown = std::min(members.size(), kMaxMembers);
    for (std::size_t i = 0; i < shown; ++i) {
      lo = std::min(lo, members[i].values().col(d).minCoeff());
      hi = std::max(hi, members[i].values().col(d).maxCoeff());
    }
    out << "<g class=\"panel\" data-dim=\"" << d + 1 << "\">\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << top + kMargin << "\" width=\"" << kWidth - 2.0 * kMargin
        << "\" height=\"" << kPanel - 2.0 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMargin << "\" y=\"" << top + kMargin - 6.0
        << "\" font-family=\"sans-serif\" font-size=\"11\">dim " << d + 1 << "  [" << format_double(lo) << ", "
        << format_double(hi) << "]</text>\n";
    for (std::size_t i = 0; i < shown; ++i) {
      out << polyline(band.grid, members[i].values().col(d), lo, hi, top,
                      "stroke=\"#bbbbbb\" stroke-width=\"0.6\"");
    }
    out << polyline(band.grid, band.lower.col(d), lo, hi, top,
                    "stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"");
    out << polyline(band.grid, band.upper.col(d), lo, hi, top,
                    "stroke=\"#1f77b4\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"");
    out << polyline(band.grid, band.mean.col(d), lo, hi, top, "stroke=\"#d62728\" stroke-width=\"2\"");
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace elastic::cli
