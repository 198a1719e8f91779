#include "iclkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "iclkit/rng.hpp"

namespace iclkit {

namespace {

// Type-7 (linear interpolation) quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  double h = p * static_cast<double>(m - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo >= m - 1) return sorted[m - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

BootstrapResult bootstrap_ci(const std::vector<double>& values, const StatisticFn& statistic,
                             int n, std::uint64_t seed, double level) {
  if (values.empty()) throw EmptyInputError("bootstrap_ci: no values");
  if (n < 1) throw DomainError("bootstrap_ci: need at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("bootstrap_ci: level must be in (0,1)");
  if (!statistic) throw InputError("bootstrap_ci: null statistic");

  BootstrapResult out;
  out.point = statistic(values);
  out.n_resamples = n;
  out.seed = seed;

  std::vector<double> stats(static_cast<std::size_t>(n));
  std::vector<double> resample(values.size());
  for (int r = 0; r < n; ++r) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(r)));
    for (auto& x : resample) x = values[rng.uniform_index(values.size())];
    stats[static_cast<std::size_t>(r)] = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  double alpha = 1.0 - level;
  out.lo = quantile_sorted(stats, alpha / 2.0);
  out.hi = quantile_sorted(stats, 1.0 - alpha / 2.0);
  // Percentile endpoints are not guaranteed to bracket the full-sample
  // statistic; widen when they miss it so lo <= point <= hi holds.
  out.lo = std::min(out.lo, out.point);
  out.hi = std::max(out.hi, out.point);
  return out;
}

BootstrapResult bootstrap_ci(const std::vector<double>& values, Statistic statistic, int n,
                             std::uint64_t seed, double level) {
  StatisticFn fn = statistic == Statistic::mean ? StatisticFn(mean_of) : StatisticFn(median_of);
  return bootstrap_ci(values, fn, n, seed, level);
}

TTestResult t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw DomainError("t_test: each sample needs at least 2 points");
  auto moments = [](const std::vector<double>& v) {
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair<double, double>(m, ss / static_cast<double>(v.size() - 1));
  };
  auto [ma, va] = moments(a);
  auto [mb, vb] = moments(b);
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double sa = va / na, sb = vb / nb;
  double se2 = sa + sb;

  TTestResult out;
  if (se2 == 0.0) {
    if (ma == mb) return out;  // t 0, p 1
    out.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
    out.df = na + nb - 2.0;
    return out;
  }
  out.t = (ma - mb) / std::sqrt(se2);
  out.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  boost::math::students_t dist(out.df);
  out.p = 2.0 * boost::math::cdf(dist, -std::fabs(out.t));
  return out;
}

namespace {

void check_binary_labels(const std::vector<int>& labels, const char* where) {
  for (int l : labels)
    if (l != 0 && l != 1)
      throw DomainError(std::string(where) + ": labels must be 0/1, got " + std::to_string(l));
}

double f1_score(const std::vector<double>& preds, const std::vector<int>& labels) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    int p = preds[i] >= 0.5 ? 1 : 0;
    if (p == 1 && labels[i] == 1) ++tp;
    else if (p == 1 && labels[i] == 0) ++fp;
    else if (p == 0 && labels[i] == 1) ++fn;
  }
  long denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

// Midrank AUC: (sum of positive ranks - n_pos(n_pos+1)/2) / (n_pos * n_neg).
double auc_score(const std::vector<double>& preds, const std::vector<int>& labels) {
  const std::size_t n = preds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return preds[i] < preds[j]; });
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && preds[order[j]] == preds[order[i]]) ++j;
    double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  std::size_t n_neg = n - n_pos;
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace

double metrics(const std::vector<double>& preds, const std::vector<int>& labels, Metric kind) {
  if (preds.size() != labels.size())
    throw ShapeError("metrics: " + std::to_string(preds.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  if (preds.empty()) throw EmptyInputError("metrics: no samples");

  if (kind == Metric::accuracy) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
      if (preds[i] == static_cast<double>(labels[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
  }

  check_binary_labels(labels, "metrics");
  long n_pos = std::count(labels.begin(), labels.end(), 1);
  if (n_pos == 0) throw DegenerateLabelError("metrics: no positive labels");
  if (kind == Metric::f1) return f1_score(preds, labels);
  if (n_pos == static_cast<long>(labels.size()))
    throw DegenerateLabelError("metrics: no negative labels");
  return auc_score(preds, labels);
}

BootstrapResult bootstrap_metric_ci(const std::vector<double>& preds,
                                    const std::vector<int>& labels, Metric kind, int n,
                                    std::uint64_t seed, double level) {
  if (preds.size() != labels.size())
    throw ShapeError("bootstrap_metric_ci: prediction/label length mismatch");
  if (preds.empty()) throw EmptyInputError("bootstrap_metric_ci: no samples");
  if (n < 1) throw DomainError("bootstrap_metric_ci: need at least one resample");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("bootstrap_metric_ci: level must be in (0,1)");

  BootstrapResult out;
  out.point = metrics(preds, labels, kind);
  out.n_resamples = n;
  out.seed = seed;

  const std::size_t m = preds.size();
  std::vector<double> stats(static_cast<std::size_t>(n));
  std::vector<double> rp(m);
  std::vector<int> rl(m);
  for (int r = 0; r < n; ++r) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t k = rng.uniform_index(m);
      rp[i] = preds[k];
      rl[i] = labels[k];
    }
    double s;
    try {
      s = metrics(rp, rl, kind);
    } catch (const DegenerateLabelError&) {
      s = kind == Metric::auc ? 0.5 : 0.0;
    }
    stats[static_cast<std::size_t>(r)] = s;
  }
  std::sort(stats.begin(), stats.end());
  double alpha = 1.0 - level;
  out.lo = std::min(quantile_sorted(stats, alpha / 2.0), out.point);
  out.hi = std::max(quantile_sorted(stats, 1.0 - alpha / 2.0), out.point);
  return out;
}

AteRecord ate_macro(double acc_treated, double acc_control) {
  auto in_range = [](double a) { return a >= 0.0 && a <= 100.0; };
  if (!in_range(acc_treated) || !in_range(acc_control))
    throw DomainError("ate_macro: accuracies must lie in [0, 100]");
  AteRecord out;
  out.kind = AteKind::macro;
  out.treated_mean = Eigen::VectorXd::Constant(1, acc_treated);
  out.control_mean = Eigen::VectorXd::Constant(1, acc_control);
  out.value = Eigen::VectorXd::Constant(1, acc_treated - acc_control);
  out.mean_value = out.value[0];
  return out;
}

AteRecord ate_micro(const Eigen::VectorXd& d_icl, const Eigen::VectorXd& d_zsl) {
  if (d_icl.size() != d_zsl.size())
    throw ShapeError("ate_micro: length mismatch (" + std::to_string(d_icl.size()) + " vs " +
                     std::to_string(d_zsl.size()) + ")");
  if (d_icl.size() == 0) throw EmptyInputError("ate_micro: empty distance vectors");
  AteRecord out;
  out.kind = AteKind::micro;
  out.treated_mean = d_icl;
  out.control_mean = d_zsl;
  out.value = d_icl - d_zsl;
  out.mean_value = out.value.mean();
  return out;
}

}  // namespace iclkit
