#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "springrod/errors.hpp"

namespace springrod::io {

/// Minimal CSV writer: header row plus numeric rows, doubles encoded as
/// shortest round-trip decimals so output is platform-stable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line.push_back(',');
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
      line.append(buf, res.ptr);
    }
    line.push_back('\n');
    out_ << line;
  }

 private:
  std::ofstream out_;
};

}  // namespace springrod::io
