#pragma once

#include <stdexcept>
#include <string>

namespace evchain {

// All library failures surface as this type; messages carry a locator
// (line, sentence, fold) when one exists.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evchain
