#include "fms/curves_csv.hpp"

#include "fms/errors.hpp"
#include "fms/io_util.hpp"

#include <cmath>
#include <sstream>
#include <vector>

namespace fms {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(',', start);
    out.push_back(trim(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t row, std::size_t col, const std::string& what) {
  std::ostringstream os;
  os << source << ": row " << row;
  if (col > 0) os << ", column " << col;
  os << ": " << what;
  throw InputError(os.str());
}

}  // namespace

FunctionalSample parse_curves_csv(const std::string& text, const std::string& source) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::istringstream in(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      ++row;
      if (!trim(line).empty()) lines.emplace_back(row, line);
    }
  }
  if (lines.empty()) throw InputError(source + ": empty file");

  const auto head = split_commas(lines.front().second);
  const bool labelled = !parse_double(head.front()).has_value();
  const std::size_t offset = labelled ? 1 : 0;
  if (head.size() < offset + 2) fail(source, lines.front().first, 0, "grid needs at least 2 points");
  std::vector<double> grid;
  for (std::size_t c = offset; c < head.size(); ++c) {
    const auto v = parse_double(head[c]);
    if (!v) fail(source, lines.front().first, c + 1, "non-numeric grid value '" + std::string(head[c]) + "'");
    if (!std::isfinite(*v)) fail(source, lines.front().first, c + 1, "grid value is not finite");
    if (!grid.empty() && !(*v > grid.back())) fail(source, lines.front().first, c + 1, "grid not increasing");
    grid.push_back(*v);
  }
  if (lines.size() < 2) throw InputError(source + ": no curves after the grid row");

  const auto m = grid.size();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(m));
  std::vector<std::string> labels;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto row = lines[r].first;
    const auto cells = split_commas(lines[r].second);
    if (cells.size() != m + offset)
      fail(source, row, 0, "expected " + std::to_string(m + offset) + " cells, found " + std::to_string(cells.size()));
    if (labelled) labels.emplace_back(cells.front());
    for (std::size_t c = 0; c < m; ++c) {
      const auto v = parse_double(cells[c + offset]);
      if (!v) fail(source, row, c + offset + 1, "non-numeric value '" + std::string(cells[c + offset]) + "'");
      if (!std::isfinite(*v)) fail(source, row, c + offset + 1, "value is not finite");
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return FunctionalSample(Grid::make(std::move(grid)), std::move(values), std::move(labels));
}

FunctionalSample read_curves_csv(const std::string& path) { return parse_curves_csv(read_file(path), path); }

std::string format_curves_csv(const FunctionalSample& sample) {
  std::string out;
  const bool labelled = sample.has_labels();
  if (labelled) out += "label";
  const auto& pts = sample.grid()->points();
  for (std::size_t c = 0; c < pts.size(); ++c) {
    if (c > 0 || labelled) out += ',';
    out += format_double(pts[c]);
  }
  out += '\n';
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (labelled) out += sample.labels()[i];
    for (Eigen::Index c = 0; c < sample.values().cols(); ++c) {
      if (c > 0 || labelled) out += ',';
      out += format_double(sample.values()(static_cast<Eigen::Index>(i), c));
    }
    out += '\n';
  }
  return out;
}

void write_curves_csv(const std::string& path, const FunctionalSample& sample) {
  for (const auto& l : sample.labels())
    if (l.find_first_of(",\n\r") != std::string::npos)
      throw InputError("label '" + l + "' cannot be written unambiguously to CSV");
  write_file_atomic(path, format_curves_csv(sample));
}

}  // namespace fms
