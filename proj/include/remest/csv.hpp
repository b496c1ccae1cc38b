#pragma once

// CSV emission: comma separated, header row, LF line endings, '.' decimal
// separator, numbers printed with enough digits to round-trip exactly.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace remest {

inline std::string csv_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
      throw std::invalid_argument("CsvWriter: row width does not match header");
    }
    rows_.push_back(std::move(cells));
  }

  std::string str() const {
    std::ostringstream os;
    write_line(os, header_);
    for (const auto& row : rows_) write_line(os, row);
    return os.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error("CsvWriter: cannot open " + path);
    out << str();
  }

 private:
  static void write_line(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) os << ',';
      os << cells[i];
    }
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace remest
