#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iclkit/abt.hpp"
#include "iclkit/contrastive.hpp"
#include "iclkit/mixed_effects.hpp"
#include "iclkit/stats.hpp"

namespace iclkit {

// One measurement line in a rendered table. Optional cells render empty.
struct ReportRow {
  std::string metric;
  double value = 0.0;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::optional<long> n;
};

struct ReportTable {
  std::string name;
  std::vector<ReportRow> rows;
};

// Shortest round-trip decimal form; the one double formatter for all reports.
std::string format_double(double v);

// CSV with the fixed header metric,value,ci_lo,ci_hi,n. Deterministic bytes.
std::string render_csv(const ReportTable& table);

// Stored-result JSON: {"table": name, "rows": [{metric, value, ci_lo?, ci_hi?, n?}]}
ReportTable load_report_table(const std::string& path);
std::string report_table_json(const ReportTable& table);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// JSON emitters for command outputs. All return compact deterministic JSON
// (sorted keys, shortest-round-trip doubles) with a trailing newline.
std::string bootstrap_json(const BootstrapResult& r);
std::string duality_report_json(const DualityReport& r);
std::string duality_summary_json(int trials, Kernel kernel, double tolerance,
                                 double max_abs_diff, bool passed);
std::string lmm_report_json(const LmmFit& fit, const std::optional<R2Report>& r2);
std::string shift_map_report_json(const HighDimMapFit& map_fit,
                                  const std::optional<DistanceRegressionFit>& dist_fit);
std::string experiment_summary_json(const ExperimentResult& result, LearningType lt,
                                    const std::string& records_path);
std::string weight_diff_report_json(const WeightDiffReport& report);
std::string ranked_example_json(const std::string& id, double score);
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace iclkit
