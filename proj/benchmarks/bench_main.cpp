// Microbenchmarks for the hot paths: attention, duality sweeps, ranking,
// mixed-model fits and the bootstrap.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "iclkit/attention.hpp"
#include "iclkit/contrastive.hpp"
#include "iclkit/mixed_effects.hpp"
#include "iclkit/rng.hpp"
#include "iclkit/selection.hpp"
#include "iclkit/stats.hpp"

using namespace iclkit;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void bm_self_attention(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::Index d = 64;
  const Eigen::MatrixXd q = gaussian(n, d, 1);
  const Eigen::MatrixXd k = gaussian(n, d, 2);
  const Eigen::MatrixXd v = gaussian(n, d, 3);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto _ : state) benchmark::DoNotOptimize(self_attention(q, k, v, scale));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_self_attention)->Range(16, 512)->Complexity(benchmark::oNSquared);

void bm_duality_check(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  TokenSequence seq;
  for (int i = 0; i < 8; ++i) {
    seq.tokens.push_back(i);
    seq.segments.push_back(Segment::example);
  }
  seq.tokens.push_back(99);
  seq.segments.push_back(Segment::query);
  AttentionWeights w = AttentionWeights::random(d, 7);
  w.w.setZero();
  for (auto _ : state)
    benchmark::DoNotOptimize(duality_check(seq, w, Kernel::exp_feature, 1e-6, 11));
}
BENCHMARK(bm_duality_check)->Arg(8)->Arg(16)->Arg(64);

void bm_bm25_rank(benchmark::State& state) {
  const int docs = static_cast<int>(state.range(0));
  Rng rng(5);
  std::vector<CorpusEntry> corpus;
  corpus.reserve(static_cast<std::size_t>(docs));
  for (int i = 0; i < docs; ++i) {
    std::string text;
    for (int w = 0; w < 12; ++w)
      text += "tok" + std::to_string(rng.uniform_index(500)) + " ";
    corpus.push_back({"d" + std::to_string(i), text, {}, {}});
  }
  const Bm25Index index = Bm25Index::build(corpus);
  for (auto _ : state) benchmark::DoNotOptimize(bm25_rank("tok1 tok42 tok99", index, 10));
}
BENCHMARK(bm_bm25_rank)->Range(256, 16384);

void bm_fit_lmm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(9);
  DesignMatrix design;
  design.fixed.resize(n, 4);
  design.random = Eigen::MatrixXd::Ones(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design.fixed(i, 0) = 1.0;
    for (int j = 1; j < 4; ++j) design.fixed(i, j) = rng.normal();
    design.group_ids.push_back(static_cast<int>(i % 8));
    y[i] = design.fixed.row(i).sum() + 0.5 * rng.normal() +
           0.3 * static_cast<double>(i % 8);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_lmm(y, design));
}
BENCHMARK(bm_fit_lmm)->Arg(256)->Arg(1024)->Arg(4096);

void bm_bootstrap_ci(benchmark::State& state) {
  Rng rng(13);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(state.range(0)));
  for (int i = 0; i < state.range(0); ++i) values.push_back(rng.normal());
  for (auto _ : state)
    benchmark::DoNotOptimize(bootstrap_ci(values, Statistic::mean, 1000, 1987));
}
BENCHMARK(bm_bootstrap_ci)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
