// SPDX-License-Identifier: Apache-2.0

#include "stopaudit/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "stopaudit/error.hpp"

namespace stopaudit::csv {

namespace {
constexpr std::size_t kChunk = 1 << 16;
}  // namespace

Reader::Reader(std::istream& in, char delimiter)
    : in_(in), delimiter_(delimiter), buffer_(kChunk) {}

int Reader::peek() {
  if (pos_ == end_) {
    in_.read(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    end_ = static_cast<std::size_t>(in_.gcount());
    pos_ = 0;
    if (end_ == 0) return EOF;
  }
  return static_cast<unsigned char>(buffer_[pos_]);
}

int Reader::get() {
  int c = peek();
  if (c != EOF) ++pos_;
  return c;
}

bool Reader::next(std::vector<std::string>& fields) {
  fields.clear();
  if (peek() == EOF) return false;
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;
  while (true) {
    int c = get();
    if (quoted) {
      if (c == EOF) {
        throw Error(ErrorKind::kData, "unterminated quoted field starting on line " +
                                          std::to_string(record_line_));
      }
      if (c == '"') {
        if (peek() == '"') {
          get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == EOF || c == '\n' || c == '\r') {
      if (c == '\r' && peek() == '\n') get();
      if (c != EOF) ++line_;
      fields.push_back(std::move(field));
      return true;
    }
    if (c == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
      continue;
    }
    if (c == '"' && field.empty() && !field_started_quoted) {
      quoted = true;
      field_started_quoted = true;
      continue;
    }
    field.push_back(static_cast<char>(c));
  }
}

std::string escape(std::string_view field, char delimiter) {
  bool needs = field.find_first_of("\"\r\n") != std::string_view::npos ||
               field.find(delimiter) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_.put(delimiter_);
    out_ << escape(fields[i], delimiter_);
  }
  out_ << "\r\n";
}

std::size_t Document::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorKind::kSchema, "missing column \"" + std::string(name) + "\"");
}

Document parse_document(std::istream& in, char delimiter) {
  Reader reader(in, delimiter);
  Document doc;
  if (!reader.next(doc.header)) return doc;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != doc.header.size()) {
      throw Error(ErrorKind::kData, "line " + std::to_string(reader.line()) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(doc.header.size()));
    }
    doc.rows.push_back(fields);
  }
  return doc;
}

Document read_document(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return parse_document(in, delimiter);
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "NA";
  return std::string(buf, ptr);
}

}  // namespace stopaudit::csv
