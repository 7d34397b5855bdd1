#pragma once

#include "hdmean/linalg.hpp"

#include <istream>
#include <stdexcept>
#include <string>

namespace hdmean::cli {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Delimiter { Comma, Whitespace };

/// Comma if the first data line contains one, whitespace otherwise.
Delimiter detect_delimiter(const std::string& line);

/// Numeric matrix, one observation per row. Blank lines and lines starting
/// with '#' are skipped; with `header` the first remaining line is dropped.
/// Ragged rows, non-numeric or non-finite cells and empty input raise
/// DataError naming source:line.
Matrix read_matrix(std::istream& in, bool header, const std::string& source);
Matrix read_matrix_file(const std::string& path, bool header);

}  // namespace hdmean::cli
