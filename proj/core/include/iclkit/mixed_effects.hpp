#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "iclkit/errors.hpp"

namespace iclkit {

// y = fixed * beta + random-effect contribution per group + noise.
// group_ids must be dense in [0, G); `random` holds the per-observation
// covariates whose coefficients vary by group.
struct DesignMatrix {
  Eigen::MatrixXd fixed;       // n x p
  std::vector<int> group_ids;  // length n
  Eigen::MatrixXd random;      // n x q

  int n_groups() const;
  void validate() const;
};

struct LmmFit {
  Eigen::VectorXd beta;  // p fixed coefficients
  Eigen::MatrixXd u;     // G x q per-group effects
  Eigen::VectorXd tau2;  // q random-effect variances
  double sigma2 = 0.0;
  double loglik = 0.0;
  bool converged = false;
};

struct R2Report {
  double marginal = 0.0;
  double conditional = 0.0;
};

// Profiled maximum likelihood: closed-form GLS for beta at fixed variance
// ratios, coordinate search (grid + golden section) over the ratios.
LmmFit fit_lmm(const Eigen::VectorXd& y, const DesignMatrix& design);

// marginal = var(X beta) / (var(X beta) + sum tau2 + sigma2);
// conditional adds sum tau2 to the numerator. Variances are population
// variances over the fitted values.
R2Report nakagawa_r2(const LmmFit& fit, const DesignMatrix& design);

// acc ~ intercept + b (+ b*e when interact) with a per-model random slope
// on e.
LmmFit fit_accuracy_model(const Eigen::VectorXd& acc, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& e, const std::vector<int>& model_id,
                          bool interact);

enum class ProbeTask { regression, binary };

struct ProbeFit {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double score = 0.0;  // R^2 for regression, AUC for binary
  ProbeTask task = ProbeTask::regression;
};

// Ridge (lambda 1e-6) least squares on x with an unpenalized intercept.
// Binary mode fits the same linear score on 0/1 labels and reports AUC.
ProbeFit fit_linear_probe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ProbeTask task);

struct MapTrainConfig {
  double lr = 1e-3;
  int epochs = 200;
  int batch = 64;
  double weight_decay = 1e-4;
  double holdout = 0.2;  // fraction held out for evaluation
  std::uint64_t seed = 1987;
  bool baseline = false;  // drop the indexed (fixed) term entirely
  bool fit_intercept = true;

  void validate() const;
};

// Parameters of the mixed map h_icl ~ (w_random + w_fixed[index]) h_zsl + w0.
struct MapParams {
  Eigen::MatrixXd w_random;
  std::vector<Eigen::MatrixXd> w_fixed;  // one slab per index label; may be empty
  Eigen::VectorXd w0;
};

struct HighDimMapFit {
  Eigen::MatrixXd w_random;
  std::vector<Eigen::MatrixXd> w_fixed;
  std::vector<std::string> index_labels;  // label order matching w_fixed
  Eigen::VectorXd w0;
  double train_cosine = 0.0;
  double holdout_cosine = 0.0;
  bool baseline = false;
};

// Maximizes mean cosine(pred, h_icl) by minibatch Adam with decoupled weight
// decay; w_random starts at identity. Rows of h_zsl / h_icl are samples;
// index supplies one label per row.
HighDimMapFit fit_highdim_mixed_map(const Eigen::MatrixXd& h_zsl, const Eigen::MatrixXd& h_icl,
                                    const std::vector<std::string>& index,
                                    const MapTrainConfig& config);

struct DistanceRegressionFit {
  Eigen::MatrixXd w;   // cols(d_zsl) x cols(d_icl)
  Eigen::VectorXd w0;  // per-target intercept
  double r2 = 0.0;     // holdout R^2, pooled over targets
};

// Ridge regression d_icl ~ d_zsl * w + w0 with a seeded 80/20 split.
DistanceRegressionFit fit_distance_regression(const Eigen::MatrixXd& d_zsl,
                                              const Eigen::MatrixXd& d_icl,
                                              double ridge = 1e-6, double holdout = 0.2,
                                              std::uint64_t seed = 1987);

namespace detail {

// Mean cosine over `rows` and its analytic gradient; split out so the
// gradient can be checked against finite differences.
double map_objective(const MapParams& params, const Eigen::MatrixXd& h_zsl,
                     const Eigen::MatrixXd& h_icl, const std::vector<int>& index_ids,
                     const std::vector<int>& rows);
MapParams map_gradient(const MapParams& params, const Eigen::MatrixXd& h_zsl,
                       const Eigen::MatrixXd& h_icl, const std::vector<int>& index_ids,
                       const std::vector<int>& rows);

}  // namespace detail

}  // namespace iclkit
