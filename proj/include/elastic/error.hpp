#pragma once

#include <stdexcept>
#include <string>

namespace elastic {

// Malformed or inconsistent caller input (shapes, grids, invalid warpings).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure could not produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace elastic
