#pragma once

#include <string>
#include <vector>

namespace iat {

/// CSV with a fixed column order and a header row; numeric cells are
/// formatted with %.10g so identical computations give identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  void add_row_numeric(const std::vector<double>& cells);

  std::string str() const;
  void write(const std::string& path) const;

  static std::string num(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace iat
