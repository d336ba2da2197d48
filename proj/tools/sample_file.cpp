#include "sample_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace elastic::cli {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_row(const std::string& line, const std::string& where) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (end > p && (end[-1] == '\r' || end[-1] == ' ')) --end;
  while (p <= end) {
    while (p < end && *p == ' ') ++p;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc()) throw InputError(where + ": expected a number");
    out.push_back(v);
    p = res.ptr;
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    if (*p != ',') throw InputError(where + ": expected ','");
    ++p;
  }
  return out;
}

SampleFile read_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw InputError(path.string() + ": missing '#' JSON header line");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line.substr(1));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": bad header: " + e.what());
  }
  const auto field = [&](const char* key) -> std::size_t {
    if (!header.contains(key) || !header[key].is_number_unsigned()) {
      throw InputError(path.string() + ": header needs a non-negative integer \"" + key + "\"");
    }
    return header[key].get<std::size_t>();
  };
  if (header.value("version", 0) != 1) throw InputError(path.string() + ": unsupported version");
  const std::size_t n = field("N");
  const std::size_t t = field("T");
  const std::size_t m = field("m");
  const bool has_labels = header.value("labels", false);
  if (n == 0 || t < 2 || m == 0) throw InputError(path.string() + ": empty sample");

  if (!std::getline(in, line)) throw InputError(path.string() + ": missing grid row");
  const std::vector<double> grid_points = parse_row(line, path.string() + ":2");
  if (grid_points.size() != t) throw InputError(path.string() + ":2: grid row must have T values");
  Grid grid(grid_points);

  const std::size_t width = t * m + (has_labels ? 1 : 0);
  std::vector<Func> funcs;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 3);
    if (!std::getline(in, line)) throw InputError(where + ": expected " + std::to_string(n) + " function rows");
    const std::vector<double> row = parse_row(line, where);
    if (row.size() != width) throw InputError(where + ": expected " + std::to_string(width) + " values");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
    for (std::size_t d = 0; d < m; ++d) {
      for (std::size_t r = 0; r < t; ++r) v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = row[d * t + r];
    }
    if (has_labels) {
      const double l = row.back();
      if (!(l >= 1.0) || l != std::floor(l) || l > 1e9) throw InputError(where + ": label must be a positive integer");
      labels.push_back(static_cast<int>(l));
    }
    try {
      funcs.emplace_back(grid, std::move(v));
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") throw InputError(path.string() + ": more rows than N");
  }
  SampleFile out{FunctionSample(grid, std::move(funcs)), std::nullopt};
  if (has_labels) out.labels = std::move(labels);
  return out;
}

void write_sample_file(const std::filesystem::path& path, const FunctionSample& sample,
                       const std::vector<int>* labels) {
  if (labels != nullptr && labels->size() != sample.size()) throw InputError("one label per function required");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  const nlohmann::json header = {{"version", 1},
                                 {"N", sample.size()},
                                 {"T", sample.grid.size()},
                                 {"m", sample.dims()},
                                 {"labels", labels != nullptr}};
  out << "# " << header.dump() << '\n';
  for (std::size_t r = 0; r < sample.grid.size(); ++r) out << (r ? "," : "") << format_double(sample.grid[r]);
  out << '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const Eigen::MatrixXd& v = sample.funcs[i].values();
    bool first = true;
    for (Eigen::Index d = 0; d < v.cols(); ++d) {
      for (Eigen::Index r = 0; r < v.rows(); ++r) {
        out << (first ? "" : ",") << format_double(v(r, d));
        first = false;
      }
    }
    if (labels != nullptr) out << ',' << (*labels)[i];
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace elastic::cli
