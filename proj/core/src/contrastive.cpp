#include "iclkit/contrastive.hpp"

#include <algorithm>
#include <cmath>

namespace iclkit {

void ContrastiveConfig::validate() const {
  if (!(margin >= 0.0)) throw ConfigError("contrastive margin must be >= 0");
  if (!(eta > 0.0)) throw ConfigError("contrastive eta must be > 0");
}

Eigen::VectorXd apply_kernel(Kernel kernel, const Eigen::VectorXd& x) {
  if (kernel == Kernel::identity) return x;
  return x.array().exp();
}

double contrastive_loss(double d12, bool y_c, const ContrastiveConfig& config) {
  config.validate();
  if (!(d12 >= 0.0)) throw DomainError("contrastive_loss: distance must be >= 0");
  if (y_c) return d12;
  return std::max(config.margin - d12, 0.0);
}

AugmentedPair compute_augmentations(const Eigen::VectorXd& h,
                                    const AttentionWeights& weights, Kernel kernel) {
  weights.validate();
  if (h.size() != weights.depth)
    throw ShapeError("compute_augmentations: h has length " + std::to_string(h.size()) +
                     ", weights expect " + std::to_string(weights.depth));
  AugmentedPair out;
  out.source = h;
  out.x_k = weights.w * apply_kernel(kernel, weights.w_k * h);
  out.x_v = weights.w_v * h;
  return out;
}

namespace {

void check_pair_shapes(const std::vector<KvPair>& pairs, const Eigen::MatrixXd& w,
                       const char* where) {
  for (const auto& p : pairs) {
    if (p.key.size() != w.cols() || p.value.size() != w.rows())
      throw ShapeError(std::string(where) + ": pair dimensions (" +
                       std::to_string(p.key.size()) + ", " + std::to_string(p.value.size()) +
                       ") do not match weight " + std::to_string(w.rows()) + "x" +
                       std::to_string(w.cols()));
  }
}

}  // namespace

Eigen::MatrixXd cl_weight_update(const std::vector<KvPair>& pairs, const Eigen::MatrixXd& w,
                                 const ContrastiveConfig& config, Kernel kernel) {
  config.validate();
  if (pairs.empty()) throw EmptyInputError("cl_weight_update: no context pairs");
  if (config.distance != Distance::squared_euclidean)
    throw UnsupportedGradientError(std::string("cl_weight_update: no closed-form gradient for ") +
                                   to_string(config.distance) + " distance");
  check_pair_shapes(pairs, w, "cl_weight_update");
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  for (const auto& p : pairs) {
    Eigen::VectorXd feat = apply_kernel(kernel, p.key);
    grad.noalias() += (w * feat - p.value) * feat.transpose();
  }
  return w - config.eta * grad;
}

Eigen::VectorXd icl_predict_via_update(const std::vector<KvPair>& context,
                                       const Eigen::VectorXd& query_h,
                                       const AttentionWeights& weights,
                                       const ContrastiveConfig& config, Kernel kernel) {
  weights.validate();
  if (query_h.size() != weights.depth)
    throw ShapeError("icl_predict_via_update: query length " + std::to_string(query_h.size()) +
                     " does not match depth " + std::to_string(weights.depth));
  Eigen::MatrixXd w_hat =
      context.empty() ? weights.w : cl_weight_update(context, weights.w, config, kernel);
  return w_hat * apply_kernel(kernel, weights.w_q * query_h);
}

DualityReport duality_check(const TokenSequence& seq, const AttentionWeights& weights,
                            Kernel kernel, double tolerance, std::uint64_t embed_seed) {
  weights.validate();
  if (weights.w.cwiseAbs().maxCoeff() != 0.0)
    throw ConfigError("duality_check: exact duality requires w = 0");
  if (!(tolerance >= 0.0)) throw DomainError("duality_check: tolerance must be >= 0");

  Eigen::MatrixXd emb = embed_tokens(seq, weights.depth, embed_seed);

  std::ptrdiff_t query_idx = -1;
  for (std::size_t i = 0; i < seq.segments.size(); ++i)
    if (seq.segments[i] == Segment::query) query_idx = static_cast<std::ptrdiff_t>(i);
  if (query_idx < 0) throw InputError("duality_check: sequence has no query token");

  Eigen::VectorXd h_q = emb.row(query_idx).transpose();
  Eigen::VectorXd x_test = apply_kernel(kernel, weights.w_q * h_q);

  std::vector<KvPair> context;
  context.reserve(static_cast<std::size_t>(query_idx));
  for (std::ptrdiff_t i = 0; i < query_idx; ++i) {
    Eigen::VectorXd h = emb.row(i).transpose();
    context.push_back({weights.w_k * h, weights.w_v * h});
  }

  Eigen::VectorXd attn = Eigen::VectorXd::Zero(weights.depth);
  double mass = 0.0;
  for (const auto& p : context) {
    double s = apply_kernel(kernel, p.key).dot(x_test);
    attn.noalias() += s * p.value;
    mass += s;
  }
  if (kernel == Kernel::softmax_normalized && !context.empty()) {
    if (mass == 0.0) throw NumericError("duality_check: zero attention mass");
    attn /= mass;
  }

  ContrastiveConfig config;  // eta 1, squared-Euclidean: the exact-duality setting
  Eigen::VectorXd upd = icl_predict_via_update(context, h_q, weights, config, kernel);

  DualityReport report;
  report.attention_output = attn;
  report.update_output = upd;
  report.kernel = kernel;
  report.tolerance = tolerance;
  report.max_abs_diff = (attn - upd).cwiseAbs().maxCoeff();
  report.passed = report.max_abs_diff <= tolerance;
  return report;
}

Eigen::MatrixXd representational_shift(const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                                       const Eigen::MatrixXd& w,
                                       const ContrastiveConfig& config, Kernel kernel) {
  config.validate();
  if (k.size() != w.cols() || v.size() != w.rows())
    throw ShapeError("representational_shift: (k, v) lengths (" + std::to_string(k.size()) +
                     ", " + std::to_string(v.size()) + ") do not match weight " +
                     std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  Eigen::VectorXd feat = apply_kernel(kernel, k);
  return config.eta * (w * feat - v) * feat.transpose();
}

WeightChain weight_chain(const SegmentReps& segments, const AttentionWeights& weights,
                         const ContrastiveConfig& config, Kernel kernel) {
  weights.validate();
  config.validate();
  auto require = [&](const Eigen::VectorXd& h, const char* name) {
    if (h.size() == 0)
      throw InputError(std::string("weight_chain: missing ") + name + " segment");
    if (h.size() != weights.depth)
      throw ShapeError(std::string("weight_chain: ") + name + " length " +
                       std::to_string(h.size()) + " does not match depth " +
                       std::to_string(weights.depth));
  };
  require(segments.instruction, "instruction");
  require(segments.zsl_task, "zsl_task");
  require(segments.prediction, "prediction");
  if (segments.icl_example && segments.icl_example->size() != weights.depth)
    throw ShapeError("weight_chain: icl_example length does not match depth");

  auto key = [&](const Eigen::VectorXd& h) -> Eigen::VectorXd { return weights.w_k * h; };
  auto val = [&](const Eigen::VectorXd& h) -> Eigen::VectorXd { return weights.w_v * h; };
  // Every delta is evaluated at the base weight; the chain composes them
  // additively, which is what makes the shift identity exact.
  auto shift = [&](const Eigen::VectorXd& k, const Eigen::VectorXd& v) {
    return representational_shift(k, v, weights.w, config, kernel);
  };

  WeightChain chain;
  chain.w_base = weights.w;

  Eigen::MatrixXd d_inst = shift(key(segments.instruction), val(segments.zsl_task));
  chain.deltas[{ChainSegment::instruction, ChainSegment::zsl_task}] = d_inst;
  chain.w_zsl = chain.w_base - d_inst;

  Eigen::MatrixXd d_pred = shift(key(segments.zsl_task), val(segments.prediction));
  chain.deltas[{ChainSegment::zsl_task, ChainSegment::prediction}] = d_pred;
  chain.w_pred = chain.w_zsl - d_pred;

  if (segments.icl_example) {
    // The instruction shapes both chains equally, so its delta is reused
    // under the icl key rather than recomputed against the example values.
    chain.deltas[{ChainSegment::instruction, ChainSegment::icl_example}] = d_inst;
    Eigen::MatrixXd d_example = shift(key(*segments.icl_example), val(segments.zsl_task));
    chain.deltas[{ChainSegment::icl_example, ChainSegment::zsl_task}] = d_example;
    chain.w_icl = chain.w_base - d_inst - d_example;
    chain.w_pred_icl = chain.w_icl - d_pred;
    chain.shift_identity_residual =
        ((chain.w_pred - chain.w_pred_icl) - d_example).cwiseAbs().maxCoeff();
  } else {
    chain.w_icl = chain.w_zsl;
    chain.w_pred_icl = chain.w_pred;
    chain.shift_identity_residual = 0.0;
  }
  return chain;
}

}  // namespace iclkit
