#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sonoforge/training.hpp"

namespace sonoforge {

/// Text serialization of a RunReport; see docs/run_report.md. Numbers are
/// printed with 17 significant digits so parse(format(r)) == r.
std::string format_run_report(const RunReport& report);
RunReport parse_run_report(const std::string& text);
void write_run_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_run_report(const std::filesystem::path& path);

/// One line of the comparison table: final-epoch metrics of one run.
struct ComparisonRow {
  std::string feature;  // display name
  double train_acc_pct = 0.0;
  double val_acc_pct = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::size_t epochs = 0;
};

ComparisonRow comparison_row(const RunReport& report);

/// Rows sorted by validation accuracy, descending (stable for ties).
std::string format_comparison_table(std::vector<ComparisonRow> rows);

}  // namespace sonoforge
