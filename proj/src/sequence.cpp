#include "cpsi/sequence.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cpsi/errors.hpp"

namespace cpsi {

SequenceMatrix::SequenceMatrix(RowMatrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InputError("sequence matrix must have at least one row and one column");
  }
  if (!values_.allFinite()) throw InputError("sequence matrix has non-finite entries");
}

SequenceMatrix SequenceMatrix::select_locations(std::span<const int> locations) const {
  RowMatrix out(values_.rows(), static_cast<Eigen::Index>(locations.size()));
  for (std::size_t c = 0; c < locations.size(); ++c) {
    const int j = locations[c];
    if (j < 1 || j > this->locations()) throw InputError("location out of range");
    out.col(static_cast<Eigen::Index>(c)) = values_.col(j - 1);
  }
  return SequenceMatrix(std::move(out));
}

Eigen::VectorXd vec(const SequenceMatrix& x) {
  const auto& m = x.values();
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

SequenceMatrix unvec(const Eigen::VectorXd& v, int components, int locations) {
  if (v.size() != static_cast<Eigen::Index>(components) * locations) {
    throw InputError("unvec: length does not match D * N");
  }
  return SequenceMatrix(Eigen::Map<const RowMatrix>(v.data(), components, locations));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

SequenceMatrix parse_csv(std::istream& in, bool skip_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  if (skip_header && std::getline(in, line)) ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    int col = 0;
    while (true) {
      ++col;
      const auto comma = rest.find(',');
      const auto cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto* first = cell.data();
      const auto* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "invalid value '" << cell << "' at row " << line_no << ", column " << col;
        throw InputError(msg.str());
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream msg;
      msg << "row " << line_no << " has " << row.size() << " values, expected "
          << rows.front().size();
      throw InputError(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("no data rows");
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return SequenceMatrix(std::move(m));
}

SequenceMatrix read_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_csv(in, skip_header);
}

void write_csv(std::ostream& out, const SequenceMatrix& x) {
  out << std::setprecision(17);
  for (int i = 0; i < x.components(); ++i) {
    for (int j = 1; j <= x.locations(); ++j) {
      if (j > 1) out << ',';
      out << x.at(i, j);
    }
    out << '\n';
  }
}

}  // namespace cpsi
