#pragma once

#include <iosfwd>
#include <string>

#include "rpl/grid.hpp"

namespace rpl {

// Text format: header `dim n0 [n1] lo0 hi0 [lo1 hi1]`, then the row-major
// values, one row of the last axis per line.
void write_function(std::ostream& os, const GridFunction& f);
GridFunction read_function(std::istream& is);
void write_mask(std::ostream& os, const SetMask& m);
SetMask read_mask(std::istream& is);

void save_function(const std::string& path, const GridFunction& f);
GridFunction load_function(const std::string& path);
void save_mask(const std::string& path, const SetMask& m);
SetMask load_mask(const std::string& path);

}  // namespace rpl
