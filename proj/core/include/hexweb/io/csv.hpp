#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace hexweb::io {

// Comma-separated numeric table; values are written as %.17g.
class CsvWriter {
 public:
  // Throws IoError.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

std::string format_number(double x);

}  // namespace hexweb::io
