#pragma once

#include "fms/function_space.hpp"

#include <string>

namespace fms {

//! First row holds the grid, each further row one curve. A non-numeric first
//! cell in the grid row marks a leading label column.
FunctionalSample parse_curves_csv(const std::string& text, const std::string& source = "<input>");
FunctionalSample read_curves_csv(const std::string& path);

std::string format_curves_csv(const FunctionalSample& sample);
void write_curves_csv(const std::string& path, const FunctionalSample& sample);

}  // namespace fms
