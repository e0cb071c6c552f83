#pragma once

#include "fms/bandwidth_scan.hpp"
#include "fms/inference.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fms {

//! A named block holding key/value entries and optionally one table.
struct ReportSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const ReportSection&) const = default;
  const std::string* find(const std::string& key) const;
};

//! Plain-text run report:
//!   [section]
//!   key = value
//!   @table col,col,...
//!   cell,cell,...
struct RunReport {
  std::vector<ReportSection> sections;

  bool operator==(const RunReport&) const = default;
  ReportSection& add(std::string name);
  const ReportSection* section(const std::string& name) const;
};

std::string format_report(const RunReport& report);
RunReport parse_report(const std::string& text);
void write_report(const std::string& path, const RunReport& report);

void add_mode_set(RunReport& report, const ModeSet& modes, const FunctionalSample& sample,
                  const std::string& prefix = "modes");
void add_scan(RunReport& report, const ScanResult& scan);
void add_mode_test(RunReport& report, const ModeTestReport& test, const FunctionalSample& sample);

}  // namespace fms
