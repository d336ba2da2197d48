#pragma once

// SampleFile: a CSV body under a one-line JSON header.
//
//   # {"version":1,"N":3,"T":5,"m":1,"labels":true}
//   0,0.25,0.5,0.75,1                      <- grid row
//   v_0(t_0),...,v_0(t_{T-1}),v_1(t_0),...,label   <- one row per function
//
// Values of a function are dimension-major (all T values of dimension 0, then
// dimension 1, ...). When "labels" is true every row ends with a positive
// integer label. Numbers are written in shortest round-trip form.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "elastic/srvf.hpp"

namespace elastic::cli {

struct SampleFile {
  FunctionSample sample;
  std::optional<std::vector<int>> labels;  // as stored, positive integers
};

SampleFile read_sample_file(const std::filesystem::path& path);

void write_sample_file(const std::filesystem::path& path, const FunctionSample& sample,
                       const std::vector<int>* labels = nullptr);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Parses one comma-separated row of doubles; throws InputError naming `where`.
std::vector<double> parse_row(const std::string& line, const std::string& where);

}  // namespace elastic::cli
