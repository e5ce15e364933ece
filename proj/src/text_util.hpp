#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "twinforge/error.hpp"

namespace twinforge {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open file", path);
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "read failed", path);
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open file for writing", path);
  out << content;
  if (!out) throw Error(Errc::Io, "write failed", path);
}

// Shortest decimal text that parses back to exactly the same double. Keeps
// formatted output stable under format/parse round-trips.
inline std::string format_double(double value) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

} // namespace twinforge
