#include "iclkit/attention.hpp"

#include <cmath>

#include "iclkit/rng.hpp"

namespace iclkit {

void TokenSequence::validate() const {
  if (tokens.size() != segments.size()) {
    throw ShapeError("TokenSequence: tokens and segments lengths differ");
  }
  for (Segment s : segments) {
    if (s == Segment::prediction) {
      throw DomainError("TokenSequence: prediction is not a token segment");
    }
  }
  if (embeddings && static_cast<std::size_t>(embeddings->rows()) != tokens.size()) {
    throw ShapeError("TokenSequence: embeddings row count does not match tokens");
  }
}

AttentionWeights AttentionWeights::zero(int depth) {
  AttentionWeights w;
  w.depth = depth;
  w.w = Eigen::MatrixXd::Zero(depth, depth);
  w.w_q = Eigen::MatrixXd::Zero(depth, depth);
  w.w_k = Eigen::MatrixXd::Zero(depth, depth);
  w.w_v = Eigen::MatrixXd::Zero(depth, depth);
  return w;
}

AttentionWeights AttentionWeights::random(int depth, std::uint64_t seed) {
  AttentionWeights w;
  w.depth = depth;
  const double sd = 1.0 / std::sqrt(static_cast<double>(depth));
  Eigen::MatrixXd* mats[4] = {&w.w, &w.w_q, &w.w_k, &w.w_v};
  for (int m = 0; m < 4; ++m) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(m)));
    mats[m]->resize(depth, depth);
    for (int i = 0; i < depth; ++i) {
      for (int j = 0; j < depth; ++j) {
        (*mats[m])(i, j) = rng.normal(0.0, sd);
      }
    }
  }
  return w;
}

void AttentionWeights::validate() const {
  const Eigen::MatrixXd* mats[4] = {&w, &w_q, &w_k, &w_v};
  for (const auto* m : mats) {
    if (m->rows() != depth || m->cols() != depth) {
      throw ShapeError("AttentionWeights: matrix is not depth x depth");
    }
    if (!m->allFinite()) {
      throw NumericError("AttentionWeights: non-finite entry");
    }
  }
}

double ModelConfig::resolved_scale() const {
  if (scale) return *scale;
  return 1.0 / std::sqrt(static_cast<double>(depth));
}

void ModelConfig::validate() const {
  if (n_layers < 1) throw ConfigError("ModelConfig: n_layers must be >= 1");
  if (depth < 1) throw ConfigError("ModelConfig: depth must be >= 1");
  if (resolved_scale() <= 0.0) throw ConfigError("ModelConfig: scale must be > 0");
}

Eigen::MatrixXd self_attention(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                               const Eigen::MatrixXd& v, double scale) {
  if (q.cols() != k.cols()) {
    throw ShapeError("self_attention: q and k column counts differ");
  }
  if (k.rows() != v.rows()) {
    throw ShapeError("self_attention: k and v row counts differ");
  }
  if (scale <= 0.0) throw DomainError("self_attention: scale must be > 0");
  if (!q.allFinite() || !k.allFinite() || !v.allFinite()) {
    throw NumericError("self_attention: non-finite input");
  }

  Eigen::MatrixXd scores = q * k.transpose() * scale;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    Eigen::ArrayXd e = (scores.row(r).array() - m).exp();
    scores.row(r) = e / e.sum();
  }
  return scores * v;
}

Eigen::MatrixXd embed_tokens(const TokenSequence& seq, int depth, std::uint64_t seed) {
  seq.validate();
  if (seq.tokens.empty()) throw EmptyInputError("embed_tokens: empty sequence");
  if (seq.embeddings) {
    if (seq.embeddings->cols() != depth) {
      throw ShapeError("embed_tokens: stored embeddings have wrong depth");
    }
    return *seq.embeddings;
  }
  const double sd = 1.0 / std::sqrt(static_cast<double>(depth));
  Eigen::MatrixXd out(seq.tokens.size(), depth);
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(seq.tokens[i])));
    for (int j = 0; j < depth; ++j) out(static_cast<Eigen::Index>(i), j) = rng.normal(0.0, sd);
  }
  return out;
}

std::vector<Eigen::MatrixXd> forward(const TokenSequence& seq,
                                     const std::vector<AttentionWeights>& weights,
                                     const ModelConfig& config) {
  config.validate();
  if (seq.tokens.empty()) throw EmptyInputError("forward: empty sequence");
  if (weights.size() != static_cast<std::size_t>(config.n_layers)) {
    throw ConfigError("forward: weights count does not match n_layers");
  }
  const double scale = config.resolved_scale();

  Eigen::MatrixXd h = embed_tokens(seq, config.depth, config.seed);
  std::vector<Eigen::MatrixXd> layers;
  layers.reserve(weights.size());
  for (const AttentionWeights& w : weights) {
    w.validate();
    if (w.depth != config.depth) throw ShapeError("forward: layer depth mismatch");
    const Eigen::MatrixXd q = h * w.w_q.transpose();
    const Eigen::MatrixXd k = h * w.w_k.transpose();
    const Eigen::MatrixXd v = h * w.w_v.transpose();
    h = self_attention(q, k, v, scale);
    layers.push_back(h);
  }
  return layers;
}

int decode_argmax(const Eigen::VectorXd& logits) {
  if (logits.size() == 0) throw EmptyInputError("decode_argmax: empty logits");
  if (!logits.allFinite()) throw NumericError("decode_argmax: non-finite logits");
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

}  // namespace iclkit
