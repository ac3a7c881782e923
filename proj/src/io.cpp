#include "rpl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rpl/error.hpp"

namespace rpl {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_header(std::ostream& os, const Grid& g) {
  os << g.dim();
  for (int a = 0; a < g.dim(); ++a) os << ' ' << g.n(a);
  for (int a = 0; a < g.dim(); ++a) os << ' ' << format_double(g.lo(a)) << ' ' << format_double(g.hi(a));
  os << '\n';
}

Grid read_header(std::istream& is) {
  int dim = 0;
  if (!(is >> dim) || (dim != 1 && dim != 2)) throw InvalidArgument("grid file: bad dimension in header");
  int n[2] = {0, 0};
  double lo[2] = {0, 0}, hi[2] = {0, 0};
  for (int a = 0; a < dim; ++a) {
    if (!(is >> n[a])) throw InvalidArgument("grid file: bad cell count in header");
  }
  for (int a = 0; a < dim; ++a) {
    if (!(is >> lo[a] >> hi[a])) throw InvalidArgument("grid file: bad bounds in header");
  }
  return dim == 1 ? Grid(lo[0], hi[0], n[0]) : Grid({lo[0], lo[1]}, {hi[0], hi[1]}, {n[0], n[1]});
}

template <class Get>
void write_body(std::ostream& os, const Grid& g, Get get) {
  const int len = g.row_length();
  for (std::size_t i = 0; i < g.size(); ++i) {
    os << get(i);
    os << ((i + 1) % len == 0 ? '\n' : ' ');
  }
}

std::vector<double> read_values(std::istream& is, const Grid& g) {
  std::vector<double> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::string token;
    if (!(is >> token)) {
      throw InvalidArgument("grid file: expected " + std::to_string(g.size()) + " values, got " +
                            std::to_string(i));
    }
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      throw InvalidArgument("grid file: value " + std::to_string(i) + " is not a number: " + token);
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("grid file: value " + std::to_string(i) + " is negative or not finite");
    }
    values[i] = v;
  }
  std::string extra;
  if (is >> extra) throw InvalidArgument("grid file: trailing data after the last value");
  return values;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  return is;
}

}  // namespace

void write_function(std::ostream& os, const GridFunction& f) {
  write_header(os, f.grid());
  write_body(os, f.grid(), [&](std::size_t i) { return format_double(f[i]); });
}

GridFunction read_function(std::istream& is) {
  Grid g = read_header(is);
  return GridFunction(g, read_values(is, g));
}

void write_mask(std::ostream& os, const SetMask& m) {
  write_header(os, m.grid());
  write_body(os, m.grid(), [&](std::size_t i) { return m.contains(i) ? '1' : '0'; });
}

SetMask read_mask(std::istream& is) {
  Grid g = read_header(is);
  auto values = read_values(is, g);
  std::vector<std::uint8_t> member(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0 && values[i] != 1.0) {
      throw InvalidArgument("mask file: value " + std::to_string(i) + " is not 0 or 1");
    }
    member[i] = values[i] == 1.0;
  }
  return SetMask(g, std::move(member));
}

void save_function(const std::string& path, const GridFunction& f) {
  auto os = open_out(path);
  write_function(os, f);
}

GridFunction load_function(const std::string& path) {
  auto is = open_in(path);
  return read_function(is);
}

void save_mask(const std::string& path, const SetMask& m) {
  auto os = open_out(path);
  write_mask(os, m);
}

SetMask load_mask(const std::string& path) {
  auto is = open_in(path);
  return read_mask(is);
}

}  // namespace rpl
