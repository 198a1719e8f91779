#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iclkit/errors.hpp"

namespace iclkit {

// Segment tags for token streams and activation dumps. Token sequences use
// the first four; `prediction` appears only in dumps.
enum class Segment { instruction, example, query, answer, prediction };

inline const char* to_string(Segment s) {
  switch (s) {
    case Segment::instruction: return "instruction";
    case Segment::example: return "example";
    case Segment::query: return "query";
    case Segment::answer: return "answer";
    case Segment::prediction: return "prediction";
  }
  return "unknown";
}

inline Segment segment_from_string(std::string_view s) {
  if (s == "instruction") return Segment::instruction;
  if (s == "example") return Segment::example;
  if (s == "query") return Segment::query;
  if (s == "answer") return Segment::answer;
  if (s == "prediction") return Segment::prediction;
  throw DomainError("unknown segment tag: " + std::string(s));
}

// Segment-tagged token stream. Embeddings are optional; absent ones are
// filled from a deterministic table seeded by the model config.
struct TokenSequence {
  std::vector<int> tokens;
  std::vector<Segment> segments;
  std::optional<Eigen::MatrixXd> embeddings;  // n_tokens x d

  std::size_t size() const { return tokens.size(); }
  void validate() const;
};

// The four per-layer weight matrices. Weights act on column-vector
// representations (q = w_q * h); the batched forward path right-multiplies
// row-major token matrices by the transpose.
struct AttentionWeights {
  Eigen::MatrixXd w;    // readout / value-side weight
  Eigen::MatrixXd w_q;
  Eigen::MatrixXd w_k;
  Eigen::MatrixXd w_v;
  int depth = 0;

  static AttentionWeights zero(int depth);
  static AttentionWeights random(int depth, std::uint64_t seed);
  void validate() const;
};

enum class Kernel { identity, exp_feature, softmax_normalized };

inline const char* to_string(Kernel k) {
  switch (k) {
    case Kernel::identity: return "identity";
    case Kernel::exp_feature: return "exp_feature";
    case Kernel::softmax_normalized: return "softmax_normalized";
  }
  return "unknown";
}

inline Kernel kernel_from_string(std::string_view s) {
  if (s == "identity") return Kernel::identity;
  if (s == "exp_feature") return Kernel::exp_feature;
  if (s == "softmax_normalized") return Kernel::softmax_normalized;
  throw DomainError("unknown kernel: " + std::string(s));
}

struct ModelConfig {
  int n_layers = 1;
  int depth = 0;
  Kernel kernel = Kernel::identity;
  std::optional<double> scale;  // defaults to 1/sqrt(depth)
  std::uint64_t seed = 0;

  double resolved_scale() const;
  void validate() const;
};

// SoftMax(q k^T * scale) v, softmax applied per query row.
Eigen::MatrixXd self_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                               const Eigen::MatrixXd& v, double scale);

// Sequence embeddings: the stored matrix when present, otherwise a Gaussian
// table (mean 0, sd 1/sqrt(depth)) keyed per token id from `seed`.
Eigen::MatrixXd embed_tokens(const TokenSequence& seq, int depth, std::uint64_t seed);

// Stacked self-attention; returns the per-layer outputs, layer l computed
// from layer l-1. weights.size() must equal config.n_layers.
std::vector<Eigen::MatrixXd> forward(const TokenSequence& seq,
                                     const std::vector<AttentionWeights>& weights,
                                     const ModelConfig& config);

// Index of the maximum logit; ties resolve to the lowest index.
int decode_argmax(const Eigen::VectorXd& logits);

}  // namespace iclkit
