#include "fms/report.hpp"

#include "fms/errors.hpp"
#include "fms/io_util.hpp"

#include <sstream>

namespace fms {

const std::string* ReportSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

ReportSection& RunReport::add(std::string name) {
  sections.push_back({std::move(name), {}, {}, {}});
  return sections.back();
}

const ReportSection* RunReport::section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = line.find(',', start);
    out.push_back(line.substr(start, p == std::string::npos ? std::string::npos : p - start));
    if (p == std::string::npos) return out;
    start = p + 1;
  }
}

void check_text(const std::string& s, bool cell) {
  if (s.find_first_of("\r\n") != std::string::npos || (cell && s.find(',') != std::string::npos))
    throw InputError("report text '" + s + "' contains a reserved character");
}

std::string bools(const std::vector<bool>& v, std::size_t i) { return v.size() > i && v[i] ? "1" : "0"; }

}  // namespace

std::string format_report(const RunReport& report) {
  std::string out = "# fms run report\n";
  for (const auto& s : report.sections) {
    check_text(s.name, false);
    out += "\n[" + s.name + "]\n";
    for (const auto& [k, v] : s.entries) {
      check_text(k, false);
      check_text(v, false);
      if (k.find(" = ") != std::string::npos || k.empty() || k.front() == '@' || k.front() == '[')
        throw InputError("report key '" + k + "' is not representable");
      out += k + " = " + v + "\n";
    }
    if (!s.columns.empty()) {
      for (const auto& c : s.columns) check_text(c, true);
      out += "@table " + join(s.columns) + "\n";
      for (const auto& r : s.rows) {
        if (r.size() != s.columns.size()) throw InputError("report table row width differs from its header");
        for (const auto& c : r) check_text(c, true);
        out += join(r) + "\n";
      }
    }
  }
  return out;
}

RunReport parse_report(const std::string& text) {
  RunReport rep;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool in_table = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line.front() == '#') {
      in_table = false;
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      rep.add(line.substr(1, line.size() - 2));
      in_table = false;
      continue;
    }
    if (rep.sections.empty()) throw InputError("report row " + std::to_string(row) + ": content before a section");
    auto& s = rep.sections.back();
    if (line.rfind("@table ", 0) == 0) {
      s.columns = split(line.substr(7));
      in_table = true;
      continue;
    }
    if (in_table) {
      auto cells = split(line);
      if (cells.size() != s.columns.size())
        throw InputError("report row " + std::to_string(row) + ": table row width differs from its header");
      s.rows.push_back(std::move(cells));
      continue;
    }
    const auto p = line.find(" = ");
    if (p == std::string::npos) throw InputError("report row " + std::to_string(row) + ": expected 'key = value'");
    s.entries.emplace_back(line.substr(0, p), line.substr(p + 3));
  }
  return rep;
}

void write_report(const std::string& path, const RunReport& report) { write_file_atomic(path, format_report(report)); }

void add_mode_set(RunReport& report, const ModeSet& modes, const FunctionalSample& sample, const std::string& prefix) {
  auto& summary = report.add(prefix);
  summary.entries = {{"count", std::to_string(modes.count())},
                     {"nonatomic", std::to_string(modes.nonatomic_count())},
                     {"clustered_curves", std::to_string(modes.clustered_count())},
                     {"unclustered_curves", std::to_string(modes.unclustered_count())},
                     {"tolerance", format_double(modes.tolerance)},
                     {"merge_radius", format_double(modes.merge_radius)}};
  summary.columns = {"mode", "size", "atomic", "stable"};
  for (std::size_t j = 0; j < modes.count(); ++j)
    summary.rows.push_back({std::to_string(j), std::to_string(modes.sizes[j]), bools(modes.atomic_flags, j),
                            bools(modes.stability_flags, j)});

  auto& assign = report.add(prefix + ".assignments");
  assign.columns = {"curve", "label", "mode", "converged"};
  for (std::size_t i = 0; i < modes.assignments.size(); ++i) {
    const std::string label = sample.has_labels() && i < sample.size() ? sample.labels()[i] : "";
    assign.rows.push_back(
        {std::to_string(i), label, std::to_string(modes.assignments[i]), bools(modes.converged, i)});
  }

  auto& curves = report.add(prefix + ".curves");
  curves.columns = {"mode"};
  for (double p : sample.grid()->points()) curves.columns.push_back(format_double(p));
  for (std::size_t j = 0; j < modes.count(); ++j) {
    std::vector<std::string> r{std::to_string(j)};
    for (double v : modes.modes[j].values()) r.push_back(format_double(v));
    curves.rows.push_back(std::move(r));
  }
}

void add_scan(RunReport& report, const ScanResult& scan) {
  auto& s = report.add("scan");
  s.entries = {{"max_distance", format_double(scan.max_distance)},
               {"values", std::to_string(scan.bandwidths.size())},
               {"plateaus", std::to_string(scan.plateaus.size())}};
  s.columns = {"bandwidth", "fraction", "nonatomic", "clustered"};
  for (std::size_t i = 0; i < scan.bandwidths.size(); ++i)
    s.rows.push_back({format_double(scan.bandwidths[i]), format_double(scan.bandwidths[i] / scan.max_distance),
                      std::to_string(scan.nonatomic_counts[i]), std::to_string(scan.clustered_counts[i])});
  auto& p = report.add("scan.candidates");
  p.columns = {"start", "end", "nonatomic", "bandwidth", "fraction"};
  for (const auto& pl : scan.plateaus)
    p.rows.push_back({std::to_string(pl.start), std::to_string(pl.end), std::to_string(pl.count),
                      format_double(pl.midpoint), format_double(pl.midpoint / scan.max_distance)});
}

void add_mode_test(RunReport& report, const ModeTestReport& test, const FunctionalSample& sample) {
  auto& s = report.add("test");
  const bool eig = test.config.statistic == Statistic::lambda_eigen;
  s.entries = {{"alpha", format_double(test.config.alpha)},
               {"boot", std::to_string(test.config.n_boot)},
               {"statistic", eig ? "lambda_eigen" : "lambda_closed_form"},
               {"split", test.config.split == SplitRule::first_half ? "first_half" : "random"},
               {"subsample1", std::to_string(test.subsample1.size())},
               {"subsample2", std::to_string(test.subsample2.size())},
               {"bandwidth", test.bandwidth.is_fixed() ? format_double(test.bandwidth.at(0)) : "per-datum"},
               {"candidates", std::to_string(test.modes.size())},
               {"significant", std::to_string(test.significant.size())},
               {"level", format_double(test.level)},
               {"redraws", std::to_string(test.redraws)}};
  s.columns = {"candidate", "stage1_mode", "size", "atomic", "lambda_eigen", "lambda_closed_form",
               "ci_lo",     "ci_hi",       "other_ci_lo", "other_ci_hi", "significant"};
  for (std::size_t c = 0; c < test.modes.size(); ++c) {
    const auto& m = test.modes[c];
    s.rows.push_back({std::to_string(c), std::to_string(test.candidate_modes[c]), std::to_string(m.cluster_size),
                      m.atomic ? "1" : "0", format_double(m.observed_eigen), format_double(m.observed_closed),
                      format_double(m.ci.lo), format_double(m.ci.hi), format_double(m.ci_other.lo),
                      format_double(m.ci_other.hi), m.significant ? "1" : "0"});
  }
  add_mode_set(report, test.stage1, sample.subset(test.subsample1), "test.stage1");
}

}  // namespace fms
