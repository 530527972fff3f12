#include "hateclf/delimited.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "hateclf/error.hpp"

namespace hateclf {

std::optional<std::size_t> DelimitedTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

DelimitedTable read_delimited(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_delimited(buf.str());
}

DelimitedTable parse_delimited(std::string_view content) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

  DelimitedTable table;
  const auto first_eol = content.find('\n');
  const auto header_line = content.substr(0, first_eol);
  table.delimiter = header_line.find('\t') != std::string_view::npos ? '\t' : ',';
  const char delim = table.delimiter;

  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool header_done = false;

  auto finish_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!header_done) {
      table.header = std::move(record);
      header_done = true;
    } else if (!blank) {
      table.rows.push_back(std::move(record));
      table.line_numbers.push_back(record_line);
    }
    record.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == delim) {
      record.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') {
      // swallowed; the '\n' ends the record
    } else if (c == '\n') {
      finish_record();
      ++line;
      record_line = line;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(ErrorKind::Format,
                "unterminated quoted field starting on line " + std::to_string(record_line));
  }
  if (!field.empty() || !record.empty() || field_was_quoted) finish_record();
  return table;
}

void write_delimited_row(std::ostream& out, const std::vector<std::string>& fields,
                         char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << delimiter;
    const std::string& f = fields[i];
    const bool quote = f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) !=
                           std::string::npos;
    if (!quote) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace hateclf
