// ttomo - locale-independent text output and atomic file writes
#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ttomo/errors.hpp"

namespace ttomo {

// shortest round-trip decimal form, '.' decimal separator regardless of locale
inline void appendNumber(std::string& s, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

inline std::string numberString(double v) {
  std::string s;
  appendNumber(s, v);
  return s;
}

// write-temp-then-rename so readers never observe partial files
inline void atomicWrite(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace ttomo
