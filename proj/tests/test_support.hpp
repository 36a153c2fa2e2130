#pragma once

#include <string>

#include "dcflow/grid.hpp"

namespace dcflow::testing {

inline std::string data_path(const std::string& rel) { return std::string(DCFLOW_DATA_DIR) + "/" + rel; }

inline GridModel load_case(const std::string& name) {
  return load_grid(data_path("matpower/" + name + ".m"));
}

}  // namespace dcflow::testing
