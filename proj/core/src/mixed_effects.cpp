#include "iclkit/mixed_effects.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "iclkit/rng.hpp"
#include "iclkit/stats.hpp"

namespace iclkit {

int DesignMatrix::n_groups() const {
  int g = -1;
  for (int id : group_ids) g = std::max(g, id);
  return g + 1;
}

void DesignMatrix::validate() const {
  const Eigen::Index n = fixed.rows();
  if (n == 0) throw EmptyInputError("DesignMatrix: no observations");
  if (fixed.cols() == 0) throw ShapeError("DesignMatrix: no fixed-effect columns");
  if (static_cast<Eigen::Index>(group_ids.size()) != n)
    throw ShapeError("DesignMatrix: group_ids length " + std::to_string(group_ids.size()) +
                     " != " + std::to_string(n) + " rows");
  if (random.size() != 0 && random.rows() != n)
    throw ShapeError("DesignMatrix: random rows " + std::to_string(random.rows()) + " != " +
                     std::to_string(n));
  if (!fixed.allFinite() || (random.size() != 0 && !random.allFinite()))
    throw InputError("DesignMatrix: non-finite design entries");
  const int g = n_groups();
  if (g <= 0) throw InputError("DesignMatrix: no groups");
  std::vector<char> seen(static_cast<std::size_t>(g), 0);
  for (int id : group_ids) {
    if (id < 0) throw InputError("DesignMatrix: negative group id");
    seen[static_cast<std::size_t>(id)] = 1;
  }
  for (int i = 0; i < g; ++i)
    if (!seen[static_cast<std::size_t>(i)])
      throw InputError("DesignMatrix: group ids not dense, missing " + std::to_string(i));
}

namespace {

constexpr double kRidge = 1e-6;

struct GroupCache {
  Eigen::MatrixXd ztz;  // q x q
  Eigen::MatrixXd xtz;  // p x q
  Eigen::VectorXd zty;  // q
};

struct LmmData {
  std::vector<GroupCache> groups;
  Eigen::MatrixXd xtx;  // p x p
  Eigen::VectorXd xty;  // p
  double yty = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
};

struct ProfileEval {
  Eigen::VectorXd beta;
  double sigma2 = 0.0;
  double loglik = -std::numeric_limits<double>::infinity();
};

// Profiled loglik at variance ratios lambda = tau2 / sigma2. Every group
// contribution goes through the Woodbury identity on M = I + S Z'Z S with
// S = sqrt(lambda), so nothing larger than q x q is ever factorized.
ProfileEval eval_profile(const LmmData& d, const Eigen::VectorXd& lambda) {
  Eigen::VectorXd s = lambda.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd a = d.xtx;
  Eigen::VectorXd b = d.xty;
  double yy = d.yty;
  double logdet = 0.0;
  if (d.q > 0) {
    for (const auto& g : d.groups) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d.q, d.q);
      m.noalias() += s.asDiagonal() * g.ztz * s.asDiagonal();
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success)
        throw NumericError("fit_lmm: group covariance factorization failed");
      Eigen::MatrixXd c = g.xtz * s.asDiagonal();  // p x q
      Eigen::VectorXd e = s.asDiagonal() * g.zty;  // q
      a.noalias() -= c * llt.solve(c.transpose());
      Eigen::VectorXd minv_e = llt.solve(e);
      b.noalias() -= c * minv_e;
      yy -= e.dot(minv_e);
      logdet += 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
  }
  Eigen::MatrixXd a_reg = a + kRidge * Eigen::MatrixXd::Identity(d.p, d.p);
  ProfileEval out;
  out.beta = a_reg.ldlt().solve(b);
  double quad = std::max(yy - 2.0 * out.beta.dot(b) + out.beta.dot(a * out.beta), 0.0);
  double n = static_cast<double>(d.n);
  out.sigma2 = std::max(quad / n, 1e-300);
  out.loglik = -0.5 * (n * std::log(2.0 * M_PI * out.sigma2) + n + logdet);
  return out;
}

std::vector<double> ratio_grid() {
  std::vector<double> grid{0.0};
  for (int i = 0; i <= 32; ++i) grid.push_back(std::pow(10.0, -8.0 + 0.5 * i));
  return grid;
}

// Golden-section maximization of f over [lo, hi] in log space.
double golden_refine(const std::function<double(double)>& f, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(std::exp(x1));
    }
  }
  return f1 >= f2 ? std::exp(x1) : std::exp(x2);
}

}  // namespace

LmmFit fit_lmm(const Eigen::VectorXd& y, const DesignMatrix& design) {
  design.validate();
  const Eigen::Index n = design.fixed.rows();
  if (y.size() != n)
    throw ShapeError("fit_lmm: y length " + std::to_string(y.size()) + " != " +
                     std::to_string(n) + " rows");
  if (!y.allFinite()) throw InputError("fit_lmm: non-finite responses");

  LmmData d;
  d.n = n;
  d.p = design.fixed.cols();
  d.q = design.random.size() == 0 ? 0 : design.random.cols();
  const int n_groups = design.n_groups();
  if (n_groups < 2) throw InputError("fit_lmm: need at least 2 groups");
  if (n <= d.p + d.q)
    throw RankError("fit_lmm: " + std::to_string(n) + " observations cannot identify " +
                    std::to_string(d.p + d.q) + " effect columns");

  d.xtx = design.fixed.transpose() * design.fixed;
  d.xty = design.fixed.transpose() * y;
  d.yty = y.squaredNorm();
  d.groups.assign(static_cast<std::size_t>(n_groups), GroupCache{});
  for (auto& g : d.groups) {
    g.ztz = Eigen::MatrixXd::Zero(d.q, d.q);
    g.xtz = Eigen::MatrixXd::Zero(d.p, d.q);
    g.zty = Eigen::VectorXd::Zero(d.q);
  }
  if (d.q > 0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& g = d.groups[static_cast<std::size_t>(design.group_ids[static_cast<std::size_t>(i)])];
      Eigen::VectorXd zi = design.random.row(i).transpose();
      g.ztz.noalias() += zi * zi.transpose();
      g.xtz.noalias() += design.fixed.row(i).transpose() * zi.transpose();
      g.zty.noalias() += zi * y[i];
    }
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d.q);
  ProfileEval best = eval_profile(d, lambda);
  bool converged = d.q == 0;
  const auto grid = ratio_grid();
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && d.q > 0; ++sweep) {
    double before = best.loglik;
    for (Eigen::Index j = 0; j < d.q; ++j) {
      auto eval_at = [&](double lj) {
        Eigen::VectorXd trial = lambda;
        trial[j] = lj;
        return eval_profile(d, trial);
      };
      std::size_t best_i = 0;
      double best_ll = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        double ll = eval_at(grid[i]).loglik;
        if (ll > best_ll) {  // strict: ties keep the smaller ratio
          best_ll = ll;
          best_i = i;
        }
      }
      double pick = grid[best_i];
      if (best_i >= 2) {
        double lo = grid[best_i - 1];
        double hi = grid[std::min(best_i + 1, grid.size() - 1)];
        if (hi > lo) {
          double refined =
              golden_refine([&](double l) { return eval_at(l).loglik; }, lo, hi);
          if (eval_at(refined).loglik > best_ll) pick = refined;
        }
      }
      lambda[j] = pick;
      best = eval_profile(d, lambda);
    }
    if (std::fabs(best.loglik - before) < 1e-8) {
      converged = true;
      break;
    }
  }

  LmmFit fit;
  fit.beta = best.beta;
  fit.sigma2 = best.sigma2;
  fit.loglik = best.loglik;
  fit.converged = converged;
  fit.tau2 = lambda * best.sigma2;
  fit.u = Eigen::MatrixXd::Zero(n_groups, d.q);
  if (d.q > 0) {
    Eigen::VectorXd s = lambda.cwiseMax(0.0).cwiseSqrt();
    for (int gi = 0; gi < n_groups; ++gi) {
      const auto& g = d.groups[static_cast<std::size_t>(gi)];
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d.q, d.q);
      m.noalias() += s.asDiagonal() * g.ztz * s.asDiagonal();
      Eigen::VectorXd rz = g.zty - g.xtz.transpose() * fit.beta;
      fit.u.row(gi) =
          (s.asDiagonal() * Eigen::MatrixXd(m.llt().solve(s.asDiagonal() * rz))).transpose();
    }
  }
  return fit;
}

R2Report nakagawa_r2(const LmmFit& fit, const DesignMatrix& design) {
  if (!fit.converged) throw InputError("nakagawa_r2: fit did not converge");
  design.validate();
  if (fit.beta.size() != design.fixed.cols())
    throw ShapeError("nakagawa_r2: beta length does not match fixed columns");
  Eigen::VectorXd xb = design.fixed * fit.beta;
  double var_f = (xb.array() - xb.mean()).square().sum() / static_cast<double>(xb.size());
  double tau_sum = fit.tau2.size() == 0 ? 0.0 : fit.tau2.sum();
  double denom = var_f + tau_sum + fit.sigma2;
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw DegenerateVarianceError("nakagawa_r2: zero total variance");
  R2Report out;
  out.marginal = var_f / denom;
  out.conditional = (var_f + tau_sum) / denom;
  return out;
}

LmmFit fit_accuracy_model(const Eigen::VectorXd& acc, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& e, const std::vector<int>& model_id,
                          bool interact) {
  const Eigen::Index n = acc.size();
  if (b.size() != n || e.size() != n || static_cast<Eigen::Index>(model_id.size()) != n)
    throw ShapeError("fit_accuracy_model: input lengths differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(acc[i] >= 0.0 && acc[i] <= 1.0))
      throw DomainError("fit_accuracy_model: accuracy outside [0,1]");
    if ((b[i] != 0.0 && b[i] != 1.0) || (e[i] != 0.0 && e[i] != 1.0))
      throw DomainError("fit_accuracy_model: b and e must be binary");
  }
  DesignMatrix design;
  design.fixed = Eigen::MatrixXd::Ones(n, interact ? 3 : 2);
  design.fixed.col(1) = b;
  if (interact) design.fixed.col(2) = b.cwiseProduct(e);
  design.random = e;
  design.group_ids = model_id;
  return fit_lmm(acc, design);
}

namespace {

// Centered ridge solve; returns weights, intercept via the column means.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ridge_fit(const Eigen::MatrixXd& x,
                                                      const Eigen::MatrixXd& y, double ridge) {
  Eigen::RowVectorXd x_mean = x.colwise().mean();
  Eigen::RowVectorXd y_mean = y.colwise().mean();
  Eigen::MatrixXd xc = x.rowwise() - x_mean;
  Eigen::MatrixXd yc = y.rowwise() - y_mean;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  Eigen::MatrixXd w = gram.ldlt().solve(xc.transpose() * yc);
  Eigen::VectorXd w0 = (y_mean - x_mean * w).transpose();
  return {w, w0};
}

}  // namespace

ProbeFit fit_linear_probe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ProbeTask task) {
  if (x.rows() == 0) throw EmptyInputError("fit_linear_probe: no samples");
  if (x.rows() != y.size())
    throw ShapeError("fit_linear_probe: " + std::to_string(x.rows()) + " rows vs " +
                     std::to_string(y.size()) + " targets");
  std::vector<int> labels;
  if (task == ProbeTask::binary) {
    labels.reserve(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0)
        throw DomainError("fit_linear_probe: binary targets must be 0/1");
      labels.push_back(static_cast<int>(y[i]));
    }
    long pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<long>(labels.size()))
      throw DegenerateLabelError("fit_linear_probe: labels are all one class");
  }

  auto [w, w0] = ridge_fit(x, y, kRidge);
  ProbeFit out;
  out.task = task;
  out.weights = w.col(0);
  out.intercept = w0[0];
  Eigen::VectorXd scores = x * out.weights;
  scores.array() += out.intercept;
  if (task == ProbeTask::regression) {
    double sse = (y - scores).squaredNorm();
    double sst = (y.array() - y.mean()).square().sum();
    out.score = sst == 0.0 ? (sse <= 1e-24 ? 1.0 : 0.0) : 1.0 - sse / sst;
  } else {
    std::vector<double> s(scores.data(), scores.data() + scores.size());
    out.score = metrics(s, labels, Metric::auc);
  }
  return out;
}

void MapTrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("map config: lr must be > 0");
  if (epochs < 1) throw ConfigError("map config: epochs must be >= 1");
  if (batch < 1) throw ConfigError("map config: batch must be >= 1");
  if (weight_decay < 0.0) throw ConfigError("map config: weight_decay must be >= 0");
  if (!(holdout >= 0.0 && holdout < 1.0)) throw ConfigError("map config: holdout must be in [0,1)");
}

namespace detail {

namespace {

// d cos(p, t) / d p = t / (|p||t|) - cos * p / |p|^2; zero-norm inputs
// contribute nothing to objective or gradient.
bool cosine_terms(const Eigen::VectorXd& p, const Eigen::VectorXd& t, double& cos_out,
                  Eigen::VectorXd& grad_out) {
  double np = p.norm(), nt = t.norm();
  if (np < 1e-300 || nt < 1e-300) return false;
  cos_out = p.dot(t) / (np * nt);
  grad_out = t / (np * nt) - cos_out * p / (np * np);
  return true;
}

Eigen::VectorXd predict_row(const MapParams& params, const Eigen::VectorXd& h, int id) {
  Eigen::VectorXd p = params.w_random * h;
  if (!params.w_fixed.empty()) p.noalias() += params.w_fixed[static_cast<std::size_t>(id)] * h;
  if (params.w0.size() > 0) p += params.w0;
  return p;
}

}  // namespace

double map_objective(const MapParams& params, const Eigen::MatrixXd& h_zsl,
                     const Eigen::MatrixXd& h_icl, const std::vector<int>& index_ids,
                     const std::vector<int>& rows) {
  if (rows.empty()) return 0.0;
  double total = 0.0;
  Eigen::VectorXd unused;
  for (int r : rows) {
    Eigen::VectorXd h = h_zsl.row(r).transpose();
    Eigen::VectorXd t = h_icl.row(r).transpose();
    double c = 0.0;
    if (cosine_terms(predict_row(params, h, index_ids[static_cast<std::size_t>(r)]), t, c,
                     unused))
      total += c;
  }
  return total / static_cast<double>(rows.size());
}

MapParams map_gradient(const MapParams& params, const Eigen::MatrixXd& h_zsl,
                       const Eigen::MatrixXd& h_icl, const std::vector<int>& index_ids,
                       const std::vector<int>& rows) {
  MapParams grad;
  grad.w_random = Eigen::MatrixXd::Zero(params.w_random.rows(), params.w_random.cols());
  grad.w_fixed.assign(params.w_fixed.size(),
                      Eigen::MatrixXd::Zero(params.w_random.rows(), params.w_random.cols()));
  grad.w0 = Eigen::VectorXd::Zero(params.w0.size());
  if (rows.empty()) return grad;
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  for (int r : rows) {
    Eigen::VectorXd h = h_zsl.row(r).transpose();
    Eigen::VectorXd t = h_icl.row(r).transpose();
    int id = index_ids[static_cast<std::size_t>(r)];
    double c = 0.0;
    Eigen::VectorXd gp;
    if (!cosine_terms(predict_row(params, h, id), t, c, gp)) continue;
    gp *= inv_m;
    grad.w_random.noalias() += gp * h.transpose();
    if (!grad.w_fixed.empty())
      grad.w_fixed[static_cast<std::size_t>(id)].noalias() += gp * h.transpose();
    if (grad.w0.size() > 0) grad.w0 += gp;
  }
  return grad;
}

}  // namespace detail

namespace {

// Decoupled-weight-decay Adam ascent step on one tensor.
struct AdamState {
  Eigen::MatrixXd m, v;
  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    v = Eigen::MatrixXd::Zero(rows, cols);
  }
  void step(Eigen::MatrixXd& p, const Eigen::MatrixXd& ascent_grad, double lr, double wd,
            int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * ascent_grad;
    v = b2 * v + (1.0 - b2) * ascent_grad.cwiseProduct(ascent_grad);
    double bc1 = 1.0 - std::pow(b1, t), bc2 = 1.0 - std::pow(b2, t);
    p.array() -= lr * wd * p.array();  // decay toward zero, decoupled
    p.array() += lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
};

}  // namespace

HighDimMapFit fit_highdim_mixed_map(const Eigen::MatrixXd& h_zsl, const Eigen::MatrixXd& h_icl,
                                    const std::vector<std::string>& index,
                                    const MapTrainConfig& config) {
  config.validate();
  if (h_zsl.rows() != h_icl.rows() || h_zsl.cols() != h_icl.cols())
    throw ShapeError("fit_highdim_mixed_map: representation shapes differ");
  const Eigen::Index n = h_zsl.rows();
  const Eigen::Index dim = h_zsl.cols();
  if (n == 0) throw EmptyInputError("fit_highdim_mixed_map: no samples");
  if (static_cast<Eigen::Index>(index.size()) != n)
    throw ShapeError("fit_highdim_mixed_map: index length does not match rows");

  std::map<std::string, int> label_ids;
  if (!config.baseline)
    for (const auto& label : index) label_ids.emplace(label, 0);
  std::vector<std::string> labels;
  for (auto& [label, id] : label_ids) {
    id = static_cast<int>(labels.size());
    labels.push_back(label);
  }
  std::vector<int> ids(static_cast<std::size_t>(n), 0);
  if (!config.baseline)
    for (Eigen::Index i = 0; i < n; ++i)
      ids[static_cast<std::size_t>(i)] = label_ids[index[static_cast<std::size_t>(i)]];

  // Seeded split; the trailing slice of the permutation is held out.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng split_rng(derive_stream(config.seed, 1));
  split_rng.shuffle(perm);
  auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.holdout));
  std::vector<int> train(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_hold));
  std::vector<int> hold(perm.end() - static_cast<std::ptrdiff_t>(n_hold), perm.end());
  if (train.empty()) throw InputError("fit_highdim_mixed_map: holdout leaves no training rows");

  MapParams params;
  params.w_random = Eigen::MatrixXd::Identity(dim, dim);
  params.w_fixed.assign(labels.size(), Eigen::MatrixXd::Zero(dim, dim));
  params.w0 = config.fit_intercept ? Eigen::VectorXd::Zero(dim) : Eigen::VectorXd();

  AdamState st_random, st_w0;
  st_random.init(dim, dim);
  st_w0.init(params.w0.size(), 1);
  std::vector<AdamState> st_fixed(labels.size());
  for (auto& st : st_fixed) st.init(dim, dim);

  int t = 0;
  std::vector<int> order = train;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(derive_stream(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    epoch_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch)) {
      auto stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      std::vector<int> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(stop));
      MapParams g = detail::map_gradient(params, h_zsl, h_icl, ids, batch);
      ++t;
      st_random.step(params.w_random, g.w_random, config.lr, config.weight_decay, t);
      for (std::size_t f = 0; f < params.w_fixed.size(); ++f)
        st_fixed[f].step(params.w_fixed[f], g.w_fixed[f], config.lr, config.weight_decay, t);
      if (params.w0.size() > 0) {
        Eigen::MatrixXd w0_mat = params.w0, g0_mat = g.w0;
        st_w0.step(w0_mat, g0_mat, config.lr, 0.0, t);  // no decay on the intercept
        params.w0 = w0_mat;
      }
    }
  }

  HighDimMapFit out;
  out.w_random = params.w_random;
  out.w_fixed = params.w_fixed;
  out.index_labels = labels;
  out.w0 = params.w0.size() > 0 ? params.w0 : Eigen::VectorXd::Zero(dim);
  out.baseline = config.baseline;
  out.train_cosine = detail::map_objective(params, h_zsl, h_icl, ids, train);
  out.holdout_cosine =
      hold.empty() ? out.train_cosine : detail::map_objective(params, h_zsl, h_icl, ids, hold);
  return out;
}

DistanceRegressionFit fit_distance_regression(const Eigen::MatrixXd& d_zsl,
                                              const Eigen::MatrixXd& d_icl, double ridge,
                                              double holdout, std::uint64_t seed) {
  if (d_zsl.rows() != d_icl.rows())
    throw ShapeError("fit_distance_regression: row counts differ");
  const Eigen::Index n = d_zsl.rows();
  if (n == 0) throw EmptyInputError("fit_distance_regression: no rows");
  if (!(holdout >= 0.0 && holdout < 1.0))
    throw DomainError("fit_distance_regression: holdout must be in [0,1)");

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng split_rng(derive_stream(seed, 1));
  split_rng.shuffle(perm);
  auto n_hold = static_cast<std::size_t>(std::floor(static_cast<double>(n) * holdout));
  std::vector<int> train(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_hold));
  std::vector<int> hold(perm.end() - static_cast<std::ptrdiff_t>(n_hold), perm.end());
  if (train.empty()) throw InputError("fit_distance_regression: holdout leaves no training rows");
  if (ridge <= 0.0 && static_cast<Eigen::Index>(train.size()) < d_zsl.cols() + 1)
    throw RankError("fit_distance_regression: fewer training rows than columns and no ridge");

  auto take = [](const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
  };
  Eigen::MatrixXd x_train = take(d_zsl, train), y_train = take(d_icl, train);
  auto [w, w0] = ridge_fit(x_train, y_train, std::max(ridge, 0.0));

  const auto& eval_rows = hold.empty() ? train : hold;
  Eigen::MatrixXd x_eval = take(d_zsl, eval_rows), y_eval = take(d_icl, eval_rows);
  Eigen::MatrixXd pred = (x_eval * w).rowwise() + w0.transpose();
  double sse = (y_eval - pred).squaredNorm();
  double sst = (y_eval.rowwise() - y_eval.colwise().mean()).squaredNorm();

  DistanceRegressionFit out;
  out.w = w;
  out.w0 = w0;
  out.r2 = sst == 0.0 ? (sse <= 1e-24 ? 1.0 : 0.0) : 1.0 - sse / sst;
  return out;
}

}  // namespace iclkit
