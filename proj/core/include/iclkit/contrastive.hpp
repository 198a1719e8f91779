#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iclkit/attention.hpp"
#include "iclkit/distance.hpp"
#include "iclkit/errors.hpp"

namespace iclkit {

struct ContrastiveConfig {
  double margin = 0.0;  // hinge margin for negative pairs
  Distance distance = Distance::squared_euclidean;
  double eta = 1.0;  // gradient step size

  void validate() const;
};

// One (key, value) context pair, already projected out of the token stream.
struct KvPair {
  Eigen::VectorXd key;
  Eigen::VectorXd value;
};

// Two views of the same representation: the key-side readout and the value
// projection. Pulling them together is what a context-induced update does.
struct AugmentedPair {
  Eigen::VectorXd x_k;     // w * phi(w_k * h)
  Eigen::VectorXd x_v;     // w_v * h
  Eigen::VectorXd source;  // h itself
};

struct DualityReport {
  double max_abs_diff = 0.0;
  Eigen::VectorXd attention_output;
  Eigen::VectorXd update_output;
  Kernel kernel = Kernel::identity;
  double tolerance = 0.0;
  bool passed = false;
};

// Prompt segments tracked by the weight-shift chain.
enum class ChainSegment { instruction, icl_example, zsl_task, prediction };

inline const char* to_string(ChainSegment s) {
  switch (s) {
    case ChainSegment::instruction: return "instruction";
    case ChainSegment::icl_example: return "icl_example";
    case ChainSegment::zsl_task: return "zsl_task";
    case ChainSegment::prediction: return "prediction";
  }
  return "unknown";
}

// One representation per prompt segment; the example slot is absent for a
// zero-shot prompt.
struct SegmentReps {
  Eigen::VectorXd instruction;
  std::optional<Eigen::VectorXd> icl_example;
  Eigen::VectorXd zsl_task;
  Eigen::VectorXd prediction;
};

// Weight trajectory of the zero-shot and in-context chains, plus every
// delta keyed by (key segment, value segment). With the instruction delta
// shared between chains and a common prediction-stage delta,
// w_pred - w_pred_icl reproduces deltas[(icl_example, zsl_task)] exactly;
// shift_identity_residual stores the max-abs gap of that identity.
struct WeightChain {
  Eigen::MatrixXd w_base;
  Eigen::MatrixXd w_zsl;
  Eigen::MatrixXd w_icl;
  Eigen::MatrixXd w_pred;
  Eigen::MatrixXd w_pred_icl;
  std::map<std::pair<ChainSegment, ChainSegment>, Eigen::MatrixXd> deltas;
  double shift_identity_residual = 0.0;
};

// Elementwise feature map. identity passes through; exp_feature and
// softmax_normalized both exponentiate (normalization is not part of the
// feature map, it lives in the attention readout).
Eigen::VectorXd apply_kernel(Kernel kernel, const Eigen::VectorXd& x);

// y_c * d12 + (1 - y_c) * max(margin - d12, 0).
double contrastive_loss(double d12, bool y_c, const ContrastiveConfig& config);

AugmentedPair compute_augmentations(const Eigen::VectorXd& h,
                                    const AttentionWeights& weights, Kernel kernel);

// One gradient step of 1/2 ||w phi(k) - v||^2 summed over pairs:
// returns w - eta * sum (w phi(k) - v) phi(k)^T. Only the squared-Euclidean
// objective has this closed form; other distances are rejected.
Eigen::MatrixXd cl_weight_update(const std::vector<KvPair>& pairs, const Eigen::MatrixXd& w,
                                 const ContrastiveConfig& config, Kernel kernel);

// Prediction after the context-induced update: w_hat * phi(w_q * query_h).
// An empty context skips the update, i.e. the zero-shot path.
Eigen::VectorXd icl_predict_via_update(const std::vector<KvPair>& context,
                                       const Eigen::VectorXd& query_h,
                                       const AttentionWeights& weights,
                                       const ContrastiveConfig& config, Kernel kernel);

// Computes the attention readout sum_i v_i (phi(k_i) . phi(q)) and the
// one-step-update prediction over the same context, and reports their gap.
// Exact (up to roundoff) for identity and exp_feature; softmax_normalized
// divides the readout by its kernel mass so the gap is informative, not
// asserted. Context = tokens before the last query-tagged token. Requires
// w = 0 (the identity only holds there).
DualityReport duality_check(const TokenSequence& seq, const AttentionWeights& weights,
                            Kernel kernel, double tolerance, std::uint64_t embed_seed = 0);

// eta * (w phi(k) - v) phi(k)^T: the weight shift a single (key, value)
// exposure induces at w.
Eigen::MatrixXd representational_shift(const Eigen::VectorXd& k, const Eigen::VectorXd& v,
                                       const Eigen::MatrixXd& w,
                                       const ContrastiveConfig& config, Kernel kernel);

// Builds both weight chains from per-segment representations (keys/values
// projected via weights.w_k / weights.w_v, all deltas evaluated at the base
// weight) and checks the shift identity. Mandatory segments: instruction,
// zsl_task, prediction.
WeightChain weight_chain(const SegmentReps& segments, const AttentionWeights& weights,
                         const ContrastiveConfig& config, Kernel kernel);

}  // namespace iclkit
