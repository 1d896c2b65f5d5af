#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "glmscale/errors.hpp"
#include "glmscale/synth.hpp"

namespace glmscale {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    fields.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t row, std::size_t col,
                              const std::string& what) {
  Error err(ErrorKind::Parse, path.string() + ": " + what + " at row " + std::to_string(row) +
                                  ", column " + std::to_string(col));
  err.row = row;
  err.column = col;
  throw err;
}

double parse_number(std::string_view field, const std::filesystem::path& path, std::size_t row,
                    std::size_t col) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    parse_error(path, row, col, "malformed number '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

CsvTable read_csv_table(const std::filesystem::path& path, char delimiter, bool header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());

  CsvTable table;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, delimiter);
    if (header && table.header.empty() && rows.empty()) {
      for (auto f : fields) table.header.emplace_back(f);
      width = fields.size();
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      parse_error(path, line_no, std::min(fields.size(), width) + 1,
                  "expected " + std::to_string(width) + " fields, found " +
                      std::to_string(fields.size()));
    }
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c) values[c] = parse_number(fields[c], path, line_no, c + 1);
    rows.push_back(std::move(values));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response,
                 const CsvOptions& options) {
  CsvTable table = read_csv_table(path, options.delimiter, options.header);
  const auto width = static_cast<std::size_t>(table.values.cols());

  std::size_t col = 0;
  if (const auto* name = std::get_if<std::string>(&response)) {
    const auto it = std::find(table.header.begin(), table.header.end(), *name);
    if (it == table.header.end()) {
      throw Error(ErrorKind::MissingColumn, path.string() + ": no column named '" + *name + "'");
    }
    col = static_cast<std::size_t>(it - table.header.begin());
  } else {
    col = std::get<std::size_t>(response);
    if (col >= std::max(width, table.header.size())) {
      throw Error(ErrorKind::MissingColumn,
                  path.string() + ": response column " + std::to_string(col) + " out of range");
    }
  }
  if (width < 2) {
    throw Error(ErrorKind::InsufficientData, path.string() + ": need at least one predictor");
  }
  const std::size_t p = width - 1;
  const auto n = static_cast<std::size_t>(table.values.rows());
  if (n < p + 2) {
    throw Error(ErrorKind::InsufficientData, path.string() + ": " + std::to_string(n) +
                                                 " rows, need at least p + 2 = " +
                                                 std::to_string(p + 2));
  }

  Dataset data;
  data.y = table.values.col(static_cast<Eigen::Index>(col));
  data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::Index out = 0;
  for (std::size_t c = 0; c < width; ++c) {
    if (c == col) continue;
    data.X.col(out++) = table.values.col(static_cast<Eigen::Index>(c));
  }
  if (options.test_fraction != 0.0 &&
      (options.test_fraction < 0.05 || options.test_fraction > 0.15)) {
    throw Error(ErrorKind::InvalidArgument, "load_csv: test fraction must be 0 or in [0.05, 0.15]");
  }
  data.test_mask = random_test_mask(n, options.test_fraction, options.seed);
  data.info.source = path.string();
  data.validate();
  return data;
}

void write_csv(const std::filesystem::path& path, const Dataset& data, char delimiter) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << 'x' << (j + 1) << delimiter;
  out << "y\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.X.cols(); ++j) out << data.X(i, j) << delimiter;
    out << data.y(i) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace glmscale
