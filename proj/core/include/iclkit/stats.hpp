#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "iclkit/errors.hpp"

namespace iclkit {

struct BootstrapResult {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int n_resamples = 0;
  std::uint64_t seed = 0;
};

enum class Statistic { mean, median };

using StatisticFn = std::function<double(const std::vector<double>&)>;

// Percentile bootstrap. Each resample draws from its own seed-derived RNG
// stream, so a parallel evaluation order cannot change the result. Interval
// endpoints use linearly interpolated quantiles of the resample statistics.
BootstrapResult bootstrap_ci(const std::vector<double>& values, const StatisticFn& statistic,
                             int n = 1000, std::uint64_t seed = 1987, double level = 0.95);
BootstrapResult bootstrap_ci(const std::vector<double>& values, Statistic statistic,
                             int n = 1000, std::uint64_t seed = 1987, double level = 0.95);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Welch two-sample t-test, two-sided p. Zero pooled variance degenerates to
// t=0, p=1 on equal means and p=0 otherwise.
TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b);

enum class Metric { accuracy, f1, auc };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::f1: return "f1";
    case Metric::auc: return "auc";
  }
  return "unknown";
}

inline Metric metric_from_string(std::string_view s) {
  if (s == "accuracy") return Metric::accuracy;
  if (s == "f1") return Metric::f1;
  if (s == "auc") return Metric::auc;
  throw DomainError("unknown metric: " + std::string(s));
}

// accuracy: exact-match rate. f1: positive-class F1 with preds binarized at
// 0.5. auc: rank-based (midrank ties), equal to the pairwise concordance
// count with ties worth 1/2.
double metrics(const std::vector<double>& preds, const std::vector<int>& labels, Metric kind);

// Paired bootstrap over (pred, label) rows. Resamples that lose a label
// class score 0 for f1 and 0.5 for auc rather than aborting the interval.
BootstrapResult bootstrap_metric_ci(const std::vector<double>& preds,
                                    const std::vector<int>& labels, Metric kind,
                                    int n = 1000, std::uint64_t seed = 1987,
                                    double level = 0.95);

enum class AteKind { macro, micro };

struct AteRecord {
  AteKind kind = AteKind::macro;
  Eigen::VectorXd value;         // treated - control, elementwise
  Eigen::VectorXd treated_mean;  // length 1 for macro
  Eigen::VectorXd control_mean;
  double mean_value = 0.0;
};

// Accuracy-difference effect. Accepts accuracies on either the [0,1] or the
// percentage scale; anything outside [0,100] is rejected.
AteRecord ate_macro(double acc_treated, double acc_control);

// Elementwise distance-difference effect plus its mean.
AteRecord ate_micro(const Eigen::VectorXd& d_icl, const Eigen::VectorXd& d_zsl);

}  // namespace iclkit
