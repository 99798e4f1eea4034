#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "procurl/experiment.hpp"

namespace procurl {

/// Parses a metrics.csv stream; throws ConfigError naming the bad row.
std::vector<MetricRow> read_metrics_csv(std::istream& in, const std::string& source = "<metrics>");

struct BandPoint {
  double x = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  int n = 0;
};

/// Per-strategy curve of one metric: each seed's series is smoothed with a
/// trailing mean over `window` evaluation snapshots, then averaged across seeds
/// snapshot by snapshot with a +-1 standard error band (0 for a single seed).
/// NaN entries are skipped.
std::map<std::string, std::vector<BandPoint>> aggregate_metric(const std::vector<MetricRow>& rows,
                                                               double MetricRow::*metric, int window = 2);

std::string render_svg(const std::string& title, const std::string& y_label,
                       const std::map<std::string, std::vector<BandPoint>>& series);

/// One SVG per metric column of the merged files. Columns with no finite
/// values are skipped with a warning on `warn`.
std::vector<std::filesystem::path> emit_charts(const std::vector<std::filesystem::path>& metrics_files,
                                               const std::filesystem::path& out_dir, std::ostream* warn = nullptr);

}  // namespace procurl
