#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace cdprep {

/// Shortest round-trippable decimal form (17 significant digits).
std::string fmt_g17(double v);

/// RFC-4180 CSV writer: header row, CRLF line endings, '.' decimal separator,
/// floats at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  void write_line(const std::vector<std::string>& cells);
  std::ofstream out_;
  std::size_t columns_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cdprep
