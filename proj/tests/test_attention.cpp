#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "helpers.hpp"
#include "iclkit/attention.hpp"
#include "iclkit/errors.hpp"

using namespace iclkit;

namespace {

// Softmax attention recomputed the slow way, one row at a time.
Eigen::MatrixXd attention_oracle(const Eigen::MatrixXd& q, const Eigen::MatrixXd& k,
                                 const Eigen::MatrixXd& v, double scale) {
  Eigen::MatrixXd out(q.rows(), v.cols());
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    Eigen::VectorXd s(k.rows());
    for (Eigen::Index i = 0; i < k.rows(); ++i) s[i] = q.row(r).dot(k.row(i)) * scale;
    const double m = s.maxCoeff();
    Eigen::VectorXd w = (s.array() - m).exp();
    w /= w.sum();
    out.row(r).setZero();
    for (Eigen::Index i = 0; i < k.rows(); ++i) out.row(r) += w[i] * v.row(i);
  }
  return out;
}


// Bitwise equality for Eigen objects (elementwise == yields an array).
template <typename A, typename B>
bool same_bits(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

TokenSequence make_seq(int n) {
  TokenSequence seq;
  for (int i = 0; i < n; ++i) {
    seq.tokens.push_back(100 + i);
    seq.segments.push_back(i + 1 == n ? Segment::query : Segment::example);
  }
  return seq;
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("single key-value pair returns that value row for any query") {
  const Eigen::MatrixXd q = testutil::random_matrix(3, 4, 11);
  const Eigen::MatrixXd k = testutil::random_matrix(1, 4, 12);
  const Eigen::MatrixXd v = testutil::random_matrix(1, 4, 13);
  const Eigen::MatrixXd out = self_attention(q, k, v, 0.5);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    CHECK(same_bits(out.row(r), v.row(0)));
}

TEST_CASE("zero scores average the value rows uniformly") {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 2);
  const Eigen::MatrixXd k = testutil::random_matrix(2, 2, 14);
  Eigen::MatrixXd v(2, 2);
  v << 0, 2, 2, 0;
  const Eigen::MatrixXd out = self_attention(q, k, v, 1.0);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    CHECK(out(r, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out(r, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("random instance matches the row-by-row oracle and rows stay convex") {
  const Eigen::MatrixXd q = testutil::random_matrix(4, 8, 21);
  const Eigen::MatrixXd k = testutil::random_matrix(4, 8, 22);
  const Eigen::MatrixXd v = testutil::random_matrix(4, 8, 23);
  const double scale = 1.0 / std::sqrt(8.0);
  const Eigen::MatrixXd out = self_attention(q, k, v, scale);
  const Eigen::MatrixXd expect = attention_oracle(q, k, v, scale);
  CHECK((out - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Attention rows are probability vectors: recompute and sum them.
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    Eigen::VectorXd s(k.rows());
    for (Eigen::Index i = 0; i < k.rows(); ++i) s[i] = q.row(r).dot(k.row(i)) * scale;
    Eigen::VectorXd w = (s.array() - s.maxCoeff()).exp();
    w /= w.sum();
    CHECK(w.minCoeff() >= 0.0);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("permuting key and value rows together changes nothing") {
  const Eigen::MatrixXd q = testutil::random_matrix(3, 5, 31);
  const Eigen::MatrixXd k = testutil::random_matrix(4, 5, 32);
  const Eigen::MatrixXd v = testutil::random_matrix(4, 5, 33);
  Eigen::MatrixXd kp(4, 5), vp(4, 5);
  const int perm[4] = {2, 0, 3, 1};
  for (int i = 0; i < 4; ++i) {
    kp.row(i) = k.row(perm[i]);
    vp.row(i) = v.row(perm[i]);
  }
  const Eigen::MatrixXd a = self_attention(q, k, v, 1.0);
  const Eigen::MatrixXd b = self_attention(q, kp, vp, 1.0);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("self_attention rejects bad inputs") {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 3);
  const Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 4);  // column mismatch
  const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_AS(self_attention(q, k, v, 1.0), ShapeError);
  CHECK_THROWS_AS(self_attention(q, Eigen::MatrixXd::Zero(3, 3), v, 1.0), ShapeError);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 3);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(self_attention(bad, Eigen::MatrixXd::Zero(2, 3), v, 1.0), NumericError);
  CHECK_THROWS_AS(self_attention(q, Eigen::MatrixXd::Zero(2, 3), v, 0.0), DomainError);
}

TEST_CASE("embed_tokens is deterministic and per-token-id") {
  TokenSequence seq = make_seq(4);
  seq.tokens[2] = seq.tokens[0];  // duplicate token id
  const Eigen::MatrixXd a = embed_tokens(seq, 6, 42);
  const Eigen::MatrixXd b = embed_tokens(seq, 6, 42);
  CHECK(same_bits(a, b));
  CHECK(a.rows() == 4);
  CHECK(a.cols() == 6);
  CHECK(same_bits(a.row(0), a.row(2)));   // same token id, same embedding
  CHECK(!same_bits(a.row(0), a.row(1)));  // different ids differ
  const Eigen::MatrixXd c = embed_tokens(seq, 6, 43);
  CHECK(!same_bits(a, c));                // seed matters

  TokenSequence empty;
  CHECK_THROWS_AS(embed_tokens(empty, 6, 42), EmptyInputError);
}

TEST_CASE("forward with one layer equals self_attention on the embedding") {
  TokenSequence seq = make_seq(3);
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.depth = 4;
  cfg.seed = 7;
  const AttentionWeights w = AttentionWeights::random(4, 99);
  const auto layers = forward(seq, {w}, cfg);
  REQUIRE(layers.size() == 1);

  const Eigen::MatrixXd e = embed_tokens(seq, 4, 7);
  const Eigen::MatrixXd expect = self_attention(e * w.w_q.transpose(), e * w.w_k.transpose(),
                                                e * w.w_v.transpose(), cfg.resolved_scale());
  CHECK(same_bits(layers[0], expect));
}

TEST_CASE("forward is bitwise deterministic for a fixed seed") {
  TokenSequence seq = make_seq(5);
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.depth = 6;
  cfg.seed = 1987;
  const std::vector<AttentionWeights> ws = {AttentionWeights::random(6, 1),
                                            AttentionWeights::random(6, 2)};
  const auto a = forward(seq, ws, cfg);
  const auto b = forward(seq, ws, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(same_bits(a[i], b[i]));
}

TEST_CASE("two layers match the hand-composed oracle") {
  TokenSequence seq = make_seq(3);
  ModelConfig cfg;
  cfg.n_layers = 2;
  cfg.depth = 4;
  cfg.seed = 11;
  const std::vector<AttentionWeights> ws = {AttentionWeights::random(4, 3),
                                            AttentionWeights::random(4, 4)};
  const auto layers = forward(seq, ws, cfg);
  REQUIRE(layers.size() == 2);

  Eigen::MatrixXd h = embed_tokens(seq, 4, 11);
  for (std::size_t l = 0; l < 2; ++l) {
    h = attention_oracle(h * ws[l].w_q.transpose(), h * ws[l].w_k.transpose(),
                         h * ws[l].w_v.transpose(), cfg.resolved_scale());
    CHECK((layers[l] - h).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward validates its inputs") {
  TokenSequence empty;
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.depth = 4;
  CHECK_THROWS_AS(forward(empty, {AttentionWeights::random(4, 1)}, cfg), EmptyInputError);

  TokenSequence seq = make_seq(2);
  CHECK_THROWS_AS(forward(seq, {}, cfg), ConfigError);  // layer count mismatch
  cfg.n_layers = 0;
  CHECK_THROWS_AS(forward(seq, {}, cfg), ConfigError);
}

TEST_CASE("decode_argmax picks the max with lowest-index ties") {
  Eigen::VectorXd logits(3);
  logits << 0.1, 0.9, 0.3;
  CHECK(decode_argmax(logits) == 1);

  CHECK(decode_argmax(Eigen::VectorXd::Constant(4, 2.5)) == 0);

  // Monotone transforms and constant shifts keep the index.
  Eigen::VectorXd soft = (logits.array() - logits.maxCoeff()).exp();
  soft /= soft.sum();
  CHECK(decode_argmax(soft) == decode_argmax(logits));
  CHECK(decode_argmax((logits.array() + 123.0).matrix()) == decode_argmax(logits));

  CHECK_THROWS_AS(decode_argmax(Eigen::VectorXd()), EmptyInputError);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(decode_argmax(bad), NumericError);
}

TEST_CASE("token sequence validation") {
  TokenSequence seq;
  seq.tokens = {1, 2};
  seq.segments = {Segment::example};
  CHECK_THROWS_AS(seq.validate(), ShapeError);

  seq.segments = {Segment::example, Segment::prediction};
  CHECK_THROWS_AS(seq.validate(), DomainError);

  seq.segments = {Segment::example, Segment::query};
  seq.embeddings = Eigen::MatrixXd::Zero(3, 4);
  CHECK_THROWS_AS(seq.validate(), ShapeError);
  seq.embeddings = Eigen::MatrixXd::Zero(2, 4);
  CHECK_NOTHROW(seq.validate());
}

}  // TEST_SUITE
