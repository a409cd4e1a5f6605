#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "nbarrier/error.hpp"

namespace nbarrier::detail {

// Shortest exact decimal form; used by every CSV writer so reruns are
// byte-identical.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os)
      throw Error(Errc::ConfigError, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nbarrier::detail
