#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "elastic/metrics.hpp"

namespace elastic::cli {

// t,dim,mean,lower,upper with dim counted from 1.
void write_band_csv(const std::filesystem::path& path, const PointwiseBand& band);

// One panel per dimension: member curves in grey, band edges dashed, mean solid.
void write_band_svg(const std::filesystem::path& path, const PointwiseBand& band,
                    const std::vector<Func>& members, const std::string& title);

}  // namespace elastic::cli
