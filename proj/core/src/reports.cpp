#include "iclkit/reports.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace iclkit {

namespace {

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string emit(const json& j) { return j.dump() + "\n"; }

// Quote only when the cell would break the row shape.
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

json bootstrap_fields(const BootstrapResult& r) {
  return json{{"point", r.point},
              {"lo", r.lo},
              {"hi", r.hi},
              {"n_resamples", r.n_resamples},
              {"seed", r.seed}};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string render_csv(const ReportTable& table) {
  std::string out = "metric,value,ci_lo,ci_hi,n\n";
  for (const auto& row : table.rows) {
    out += csv_cell(row.metric);
    out += ',';
    out += format_double(row.value);
    out += ',';
    if (row.ci_lo) out += format_double(*row.ci_lo);
    out += ',';
    if (row.ci_hi) out += format_double(*row.ci_hi);
    out += ',';
    if (row.n) out += std::to_string(*row.n);
    out += '\n';
  }
  return out;
}

ReportTable load_report_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw CorruptionError(path + ": invalid JSON: " + ex.what());
  }
  ReportTable table;
  try {
    table.name = doc.at("table").get<std::string>();
    for (const auto& jr : doc.at("rows")) {
      ReportRow row;
      row.metric = jr.at("metric").get<std::string>();
      row.value = jr.at("value").get<double>();
      if (jr.contains("ci_lo") && !jr.at("ci_lo").is_null())
        row.ci_lo = jr.at("ci_lo").get<double>();
      if (jr.contains("ci_hi") && !jr.at("ci_hi").is_null())
        row.ci_hi = jr.at("ci_hi").get<double>();
      if (jr.contains("n") && !jr.at("n").is_null()) row.n = jr.at("n").get<long>();
      table.rows.push_back(std::move(row));
    }
  } catch (const json::exception& ex) {
    throw CorruptionError(path + ": " + ex.what());
  }
  return table;
}

std::string report_table_json(const ReportTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json jr{{"metric", row.metric}, {"value", row.value}};
    if (row.ci_lo) jr["ci_lo"] = *row.ci_lo;
    if (row.ci_hi) jr["ci_hi"] = *row.ci_hi;
    if (row.n) jr["n"] = *row.n;
    rows.push_back(std::move(jr));
  }
  return json{{"table", table.name}, {"rows", std::move(rows)}}.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string bootstrap_json(const BootstrapResult& r) { return emit(bootstrap_fields(r)); }

std::string duality_report_json(const DualityReport& r) {
  return emit(json{{"max_abs_diff", r.max_abs_diff},
                   {"attention_output", vec_json(r.attention_output)},
                   {"update_output", vec_json(r.update_output)},
                   {"kernel", to_string(r.kernel)},
                   {"tolerance", r.tolerance},
                   {"passed", r.passed}});
}

std::string duality_summary_json(int trials, Kernel kernel, double tolerance,
                                 double max_abs_diff, bool passed) {
  return emit(json{{"trials", trials},
                   {"kernel", to_string(kernel)},
                   {"tolerance", tolerance},
                   {"max_abs_diff", max_abs_diff},
                   {"passed", passed}});
}

std::string lmm_report_json(const LmmFit& fit, const std::optional<R2Report>& r2) {
  json j{{"beta", vec_json(fit.beta)},
         {"u", mat_json(fit.u)},
         {"tau2", vec_json(fit.tau2)},
         {"sigma2", fit.sigma2},
         {"loglik", fit.loglik},
         {"converged", fit.converged}};
  if (r2) {
    j["marginal_r2"] = r2->marginal;
    j["conditional_r2"] = r2->conditional;
  }
  return emit(j);
}

std::string shift_map_report_json(const HighDimMapFit& map_fit,
                                  const std::optional<DistanceRegressionFit>& dist_fit) {
  json fixed = json::array();
  for (const auto& w : map_fit.w_fixed) fixed.push_back(mat_json(w));
  json j{{"baseline", map_fit.baseline},
         {"train_cosine", map_fit.train_cosine},
         {"holdout_cosine", map_fit.holdout_cosine},
         {"index_labels", map_fit.index_labels},
         {"w_random", mat_json(map_fit.w_random)},
         {"w_fixed", std::move(fixed)},
         {"w0", vec_json(map_fit.w0)}};
  if (dist_fit) {
    j["distance_regression"] = json{{"w", mat_json(dist_fit->w)},
                                    {"w0", vec_json(dist_fit->w0)},
                                    {"r2", dist_fit->r2}};
  }
  return emit(j);
}

std::string experiment_summary_json(const ExperimentResult& result, LearningType lt,
                                    const std::string& records_path) {
  return emit(json{{"learning_type", to_string(lt)},
                   {"n_records", result.records.size()},
                   {"n_errors", result.n_errors},
                   {"f1", bootstrap_fields(result.f1_ci)},
                   {"records", records_path}});
}

std::string weight_diff_report_json(const WeightDiffReport& report) {
  json per = json::object();
  for (const auto& [lt, fit] : report.per_dim) {
    per[to_string(lt)] = json{{"weights", vec_json(fit.weights)},
                              {"intercepts", vec_json(fit.intercepts)},
                              {"intercept", fit.intercept},
                              {"constant_dims", fit.constant_dims},
                              {"auc", fit.auc}};
  }
  json diffs = json::object();
  const std::pair<LearningType, LearningType> pairs[] = {
      {LearningType::icl, LearningType::zsl},
      {LearningType::abt, LearningType::zsl},
      {LearningType::abt, LearningType::icl},
  };
  for (const auto& [a, b] : pairs) {
    if (!report.per_dim.count(a) || !report.per_dim.count(b)) continue;
    auto [dw, dc] = weight_difference(report, a, b);
    diffs[std::string(to_string(a)) + "-" + to_string(b)] =
        json{{"weights", vec_json(dw)}, {"intercept", dc}};
  }
  return emit(json{{"per_dim", std::move(per)}, {"diffs", std::move(diffs)}});
}

std::string ranked_example_json(const std::string& id, double score) {
  return emit(json{{"id", id}, {"score", score}});
}

std::string error_json(const std::string& kind, const std::string& message) {
  return emit(json{{"error", json{{"kind", kind}, {"message", message}}}});
}

}  // namespace iclkit
