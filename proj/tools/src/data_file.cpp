#include "hdmean_cli/data_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>
#include <vector>

namespace hdmean::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool skip_line(std::string_view s) {
  const std::string_view t = trim(s);
  return t.empty() || t.front() == '#';
}

std::vector<std::string_view> split(std::string_view line, Delimiter d) {
  std::vector<std::string_view> cells;
  if (d == Delimiter::Comma) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  } else {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      cells.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  return cells;
}

}  // namespace

Delimiter detect_delimiter(const std::string& line) {
  return line.find(',') != std::string::npos ? Delimiter::Comma : Delimiter::Whitespace;
}

Matrix read_matrix(std::istream& in, bool header, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  bool header_pending = header;
  std::optional<Delimiter> delim;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    if (!delim) delim = detect_delimiter(line);
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split(line, *delim);
    if (rows == 0) {
      cols = cells.size();
    } else if (cells.size() != cols) {
      throw DataError(source + ":" + std::to_string(line_no) + ": ragged row with " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(cols));
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::string_view cell = cells[k];
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw DataError(source + ":" + std::to_string(line_no) + ": field " + std::to_string(k + 1) + " ('" +
                        std::string(cell) + "') is not a finite number");
      }
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
    }
  }
  return m;
}

Matrix read_matrix_file(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_matrix(in, header, path);
}

}  // namespace hdmean::cli
