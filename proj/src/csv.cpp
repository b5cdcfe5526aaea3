#include "si/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace si {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(std::size_t row, std::size_t col, const std::string& what) {
  std::ostringstream msg;
  msg << "csv: row " << row << ", column " << col << ": " << what;
  throw ValidationError(msg.str());
}

double parse_number(std::string_view field, std::size_t row, std::size_t col) {
  double value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    fail(row, col, "non-numeric cell '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    fail(row, col, "non-finite value '" + std::string(field) + "'");
  }
  return value;
}

// Header must be exactly x1..xp,y1..yp.
Index parse_header(std::string_view line) {
  const auto fields = split_fields(line);
  const std::size_t total = fields.size();
  if (total < 2 || total % 2 != 0) {
    throw ValidationError(
        "csv: margin dimension mismatch: header needs an equal number of x and y columns, got " +
        std::to_string(total));
  }
  const auto p = static_cast<Index>(total / 2);
  for (std::size_t c = 0; c < total; ++c) {
    const char margin = c < static_cast<std::size_t>(p) ? 'x' : 'y';
    const std::size_t index = c < static_cast<std::size_t>(p) ? c + 1 : c + 1 - p;
    const std::string expected = std::string(1, margin) + std::to_string(index);
    if (trim(fields[c]) != expected) {
      std::ostringstream msg;
      msg << "csv: header column " << c + 1 << " must be '" << expected << "', got '"
          << std::string(trim(fields[c])) << "'";
      if (total % 2 == 0 && c >= static_cast<std::size_t>(p) && trim(fields[c]).starts_with('x')) {
        msg << " (margin dimension mismatch)";
      }
      throw ValidationError(msg.str());
    }
  }
  return p;
}

}  // namespace

PairedSample parse_csv(std::istream& in, std::optional<Index> declared_p) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: empty file");
  const Index p = parse_header(trim(line));
  if (declared_p && *declared_p != p) {
    std::ostringstream msg;
    msg << "csv: margin dimension mismatch: declared p = " << *declared_p
        << " but header has p = " << p;
    throw ValidationError(msg.str());
  }

  std::vector<double> values;
  std::size_t rows = 0;  // data rows are 1-based in error messages
  while (std::getline(in, line)) {
    const auto stripped = trim(line);
    if (stripped.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
      fail(rows + 1, 1, "empty row");
    }
    const auto fields = split_fields(stripped);
    if (fields.size() != static_cast<std::size_t>(2 * p)) {
      fail(rows + 1, fields.size(),
           "expected " + std::to_string(2 * p) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      values.push_back(parse_number(trim(fields[c]), rows + 1, c + 1));
    }
    ++rows;
  }
  if (rows == 0) throw ValidationError("csv: no data rows");

  Matrix x(rows, p), y(rows, p);
  for (std::size_t r = 0; r < rows; ++r) {
    for (Index c = 0; c < p; ++c) {
      x(static_cast<Index>(r), c) = values[r * 2 * p + c];
      y(static_cast<Index>(r), c) = values[r * 2 * p + p + c];
    }
  }
  return PairedSample(std::move(x), std::move(y));
}

PairedSample load_csv(const std::string& path, std::optional<Index> declared_p) {
  std::ifstream in(path);
  if (!in) throw ValidationError("csv: cannot open '" + path + "'");
  return parse_csv(in, declared_p);
}

namespace {

void append_shortest(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string to_csv(const PairedSample& sample) {
  std::string out;
  const Index p = sample.p();
  for (Index c = 0; c < p; ++c) {
    out += "x" + std::to_string(c + 1) + ",";
  }
  for (Index c = 0; c < p; ++c) {
    out += "y" + std::to_string(c + 1);
    out += (c + 1 < p) ? "," : "";
  }
  out += "\n";
  for (Index r = 0; r < sample.n(); ++r) {
    for (Index c = 0; c < p; ++c) {
      append_shortest(out, sample.x()(r, c));
      out += ",";
    }
    for (Index c = 0; c < p; ++c) {
      append_shortest(out, sample.y()(r, c));
      if (c + 1 < p) out += ",";
    }
    out += "\n";
  }
  return out;
}

void save_csv(const PairedSample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("csv: cannot write '" + path + "'");
  out << to_csv(sample);
}

}  // namespace si
