#pragma once

#include <stdexcept>

namespace narrownet {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace narrownet
