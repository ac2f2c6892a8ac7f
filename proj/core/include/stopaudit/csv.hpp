// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace stopaudit::csv {

// Streaming RFC-4180 record reader: quoted fields, doubled quotes, embedded
// delimiters and newlines, CRLF or LF line ends.
class Reader {
 public:
  explicit Reader(std::istream& in, char delimiter = ',');

  // Reads the next record into `fields`. Returns false at end of input.
  // A blank line yields a record with a single empty field.
  bool next(std::vector<std::string>& fields);

  // 1-based physical line on which the last returned record started.
  std::size_t line() const { return record_line_; }

 private:
  int get();
  int peek();

  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  std::vector<char> buffer_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;
};

// Quotes a field only when it needs to be quoted.
std::string escape(std::string_view field, char delimiter = ',');

class Writer {
 public:
  explicit Writer(std::ostream& out, char delimiter = ',')
      : out_(out), delimiter_(delimiter) {}

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  char delimiter_;
};

// A fully materialized small CSV file (header + rows), used by the report
// renderers which read analytic numbers back from emitted files.
struct Document {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws Error(kSchema) when absent.
  std::size_t column(std::string_view name) const;
};

Document read_document(const std::string& path, char delimiter = ',');
Document parse_document(std::istream& in, char delimiter = ',');

// Shortest round-trip decimal representation; "NA" for NaN.
std::string format_double(double value);

}  // namespace stopaudit::csv
