// iclkit command line: duality checks, mixed-model fits, shift maps,
// example selection, abt experiment runs, and report rendering.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iclkit/abt.hpp"
#include "iclkit/attention.hpp"
#include "iclkit/config.hpp"
#include "iclkit/contrastive.hpp"
#include "iclkit/dataset.hpp"
#include "iclkit/dump.hpp"
#include "iclkit/mixed_effects.hpp"
#include "iclkit/reports.hpp"
#include "iclkit/rng.hpp"
#include "iclkit/selection.hpp"

namespace fs = std::filesystem;
using namespace iclkit;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) write_text_file(out_path, text);
}

Eigen::VectorXd pool_rows(const Eigen::MatrixXd& t) {
  if (t.rows() == 1) return t.row(0).transpose();
  return t.colwise().mean().transpose();
}

// ---------------------------------------------------------------- duality

struct DualityOpts {
  int trials = 100;
  std::string kernel = "identity";
  double tol = 1e-6;
  std::uint64_t seed = 1987;
  int max_depth = 8;
  int max_context = 4;
  std::string out;
};

int run_duality(const DualityOpts& o) {
  if (o.trials <= 0) throw DomainError("--trials must be positive");
  if (o.max_depth < 2) throw DomainError("--max-depth must be at least 2");
  if (o.max_context < 1) throw DomainError("--max-context must be at least 1");
  const Kernel kernel = kernel_from_string(o.kernel);
  double worst = 0.0;
  bool passed = true;
  for (int t = 0; t < o.trials; ++t) {
    Rng rng(derive_stream(o.seed, static_cast<std::uint64_t>(t)));
    const int d = 2 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(o.max_depth - 1)));
    const int m = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(o.max_context)));
    TokenSequence seq;
    for (int i = 0; i < m; ++i) {
      seq.tokens.push_back(static_cast<int>(rng.uniform_index(997)));
      seq.segments.push_back(Segment::example);
    }
    seq.tokens.push_back(static_cast<int>(rng.uniform_index(997)));
    seq.segments.push_back(Segment::query);

    AttentionWeights w = AttentionWeights::random(d, rng.next_u64());
    w.w.setZero();
    const DualityReport r = duality_check(seq, w, kernel, o.tol, rng.next_u64());
    worst = std::max(worst, r.max_abs_diff);
    passed = passed && r.passed;
  }
  emit(duality_summary_json(o.trials, kernel, o.tol, worst, passed), o.out);
  return passed ? 0 : 2;
}

// ---------------------------------------------------------------- fit-lmm

struct FitLmmOpts {
  std::string data;
  std::string y_col;
  std::vector<std::string> fixed_cols;
  std::string group_col;
  std::vector<std::string> random_cols;
  bool interact = false;
  bool no_intercept = false;
  bool r2 = false;
  std::string out;
};

int run_fit_lmm(const FitLmmOpts& o) {
  const CsvTable table = load_csv(o.data);
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw EmptyInputError("no data rows in " + o.data);

  const std::vector<double> yv = table.numeric_column(o.y_col);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), n);

  std::vector<std::vector<double>> fixed, random;
  for (const auto& c : o.fixed_cols) fixed.push_back(table.numeric_column(c));
  for (const auto& c : o.random_cols) random.push_back(table.numeric_column(c));

  DesignMatrix design;
  const Eigen::Index base = o.no_intercept ? 0 : 1;
  const Eigen::Index n_inter =
      o.interact ? static_cast<Eigen::Index>(fixed.size() * random.size()) : 0;
  design.fixed.resize(n, base + static_cast<Eigen::Index>(fixed.size()) + n_inter);
  if (base) design.fixed.col(0).setOnes();
  for (std::size_t j = 0; j < fixed.size(); ++j)
    design.fixed.col(base + static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(fixed[j].data(), n);
  if (o.interact) {
    Eigen::Index col = base + static_cast<Eigen::Index>(fixed.size());
    for (const auto& f : fixed)
      for (const auto& r : random) {
        for (Eigen::Index i = 0; i < n; ++i) design.fixed(i, col) = f[i] * r[i];
        ++col;
      }
  }

  if (random.empty()) {
    design.random = Eigen::MatrixXd::Ones(n, 1);  // random intercept per group
  } else {
    design.random.resize(n, static_cast<Eigen::Index>(random.size()));
    for (std::size_t j = 0; j < random.size(); ++j)
      design.random.col(static_cast<Eigen::Index>(j)) =
          Eigen::Map<const Eigen::VectorXd>(random[j].data(), n);
  }

  const std::vector<std::string> groups = table.string_column(o.group_col);
  std::map<std::string, int> group_id;
  for (const auto& g : groups) group_id.emplace(g, 0);
  int next = 0;
  for (auto& [name, id] : group_id) id = next++;
  design.group_ids.reserve(groups.size());
  for (const auto& g : groups) design.group_ids.push_back(group_id.at(g));

  const LmmFit fit = fit_lmm(y, design);
  std::optional<R2Report> r2;
  if (o.r2) r2 = nakagawa_r2(fit, design);
  emit(lmm_report_json(fit, r2), o.out);
  return 0;
}

// ---------------------------------------------------------------- shift-map

struct ShiftMapOpts {
  std::vector<std::string> zsl_dumps;
  std::vector<std::string> icl_dumps;
  int layer = 0;
  std::string segment = "query";
  MapTrainConfig train;
  bool baseline = false;
  bool skip_distance = false;
  std::string out;
};

// Rows for every sample that carries `segment` at `layer` in both stores.
void collect_rows(const DumpStore& zsl, const DumpStore& icl, Segment segment, int layer,
                  const std::string& label, std::vector<Eigen::VectorXd>& rows_zsl,
                  std::vector<Eigen::VectorXd>& rows_icl, std::vector<std::string>& labels) {
  for (const auto& id : zsl.sample_ids()) {
    if (!zsl.has(id, segment, layer) || !icl.has(id, segment, layer)) continue;
    rows_zsl.push_back(pool_rows(zsl.tensor(id, segment, layer)));
    rows_icl.push_back(pool_rows(icl.tensor(id, segment, layer)));
    labels.push_back(label);
  }
}

int run_shift_map(const ShiftMapOpts& o) {
  if (o.zsl_dumps.size() != o.icl_dumps.size())
    throw InputError("--zsl-dump and --icl-dump must be paired (same count)");
  if (o.zsl_dumps.empty()) throw InputError("at least one --zsl-dump/--icl-dump pair required");
  const Segment segment = segment_from_string(o.segment);

  std::vector<Eigen::VectorXd> rows_zsl, rows_icl;
  std::vector<std::string> labels;
  std::vector<std::pair<DumpStore, DumpStore>> stores;
  for (std::size_t i = 0; i < o.zsl_dumps.size(); ++i) {
    DumpStore zsl = DumpStore::open(o.zsl_dumps[i]);
    DumpStore icl = DumpStore::open(o.icl_dumps[i]);
    const std::string label = icl.manifest().model + "/" + icl.manifest().dataset;
    collect_rows(zsl, icl, segment, o.layer, label, rows_zsl, rows_icl, labels);
    stores.emplace_back(std::move(zsl), std::move(icl));
  }
  if (rows_zsl.empty())
    throw InputError("no sample carries segment '" + o.segment + "' at layer " +
                     std::to_string(o.layer) + " in both dumps");
  const auto n = static_cast<Eigen::Index>(rows_zsl.size());
  const Eigen::Index d = rows_zsl.front().size();
  Eigen::MatrixXd h_zsl(n, d), h_icl(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows_zsl[i].size() != d || rows_icl[i].size() != d)
      throw ShapeError("inconsistent representation width across dumps");
    h_zsl.row(i) = rows_zsl[i].transpose();
    h_icl.row(i) = rows_icl[i].transpose();
  }

  MapTrainConfig train = o.train;
  train.baseline = o.baseline;
  const HighDimMapFit map_fit = fit_highdim_mixed_map(h_zsl, h_icl, labels, train);

  // Query/answer distance regression rides along when both dumps carry the
  // two segments; synthetic map-only dumps simply skip it.
  std::optional<DistanceRegressionFit> dist_fit;
  if (!o.skip_distance) {
    std::vector<Eigen::VectorXd> dz, di;
    for (auto& [zsl, icl] : stores) {
      DistanceSpec spec;
      spec.a = Segment::query;
      spec.b = Segment::answer;
      spec.layer = o.layer;
      spec.per_dimension = true;
      try {
        const DistanceMatrix mz = distances(zsl, spec);
        const DistanceMatrix mi = distances(icl, spec);
        std::map<std::string, Eigen::Index> at_icl;
        for (Eigen::Index r = 0; r < mi.values.rows(); ++r)
          at_icl[mi.sample_ids[static_cast<std::size_t>(r)]] = r;
        for (Eigen::Index r = 0; r < mz.values.rows(); ++r) {
          auto it = at_icl.find(mz.sample_ids[static_cast<std::size_t>(r)]);
          if (it == at_icl.end()) continue;
          dz.push_back(mz.values.row(r).transpose());
          di.push_back(mi.values.row(it->second).transpose());
        }
      } catch (const InputError&) {
        // this pair has no query/answer coverage
      }
    }
    if (!dz.empty()) {
      Eigen::MatrixXd mdz(static_cast<Eigen::Index>(dz.size()), dz.front().size());
      Eigen::MatrixXd mdi(static_cast<Eigen::Index>(di.size()), di.front().size());
      for (Eigen::Index i = 0; i < mdz.rows(); ++i) {
        mdz.row(i) = dz[static_cast<std::size_t>(i)].transpose();
        mdi.row(i) = di[static_cast<std::size_t>(i)].transpose();
      }
      dist_fit = fit_distance_regression(mdz, mdi, 1e-6, train.holdout, train.seed);
    }
  }

  emit(shift_map_report_json(map_fit, dist_fit), o.out);
  return 0;
}

// ---------------------------------------------------------------- select

struct SelectOpts {
  std::string data;
  std::string query;
  std::string dump;
  std::string query_id;
  std::string segment = "query";
  int layer = 0;
  std::string metric = "cosine";
  int top_k = 5;
  std::string out;
};

int run_select(const SelectOpts& o) {
  std::string lines;
  if (!o.query.empty()) {
    if (o.data.empty()) throw ConfigError("--query requires --data");
    const auto corpus = corpus_from_memes(load_memes(o.data));
    const Bm25Index index = Bm25Index::build(corpus);
    for (const auto& [id, score] : bm25_rank(o.query, index, o.top_k))
      lines += ranked_example_json(id, score);
  } else if (!o.query_id.empty()) {
    if (o.dump.empty()) throw ConfigError("--query-id requires --dump");
    const DumpStore store = DumpStore::open(o.dump);
    const Segment segment = segment_from_string(o.segment);
    const Distance metric = distance_from_string(o.metric);
    if (!store.has(o.query_id, segment, o.layer))
      throw InputError("query id '" + o.query_id + "' has no tensor for segment '" +
                       o.segment + "' at layer " + std::to_string(o.layer));
    auto pooled = [&](const std::string& id) {
      return pool_rows(store.tensor(id, segment, o.layer));
    };
    const Eigen::VectorXd q = pooled(o.query_id);
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& id : store.sample_ids()) {
      if (id == o.query_id || !store.has(id, segment, o.layer)) continue;
      ranked.emplace_back(id, distance(metric, q, pooled(id)));
    }
    if (ranked.empty()) throw InputError("no candidate carries the requested segment/layer");
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second < b.second;
      return a.first < b.first;
    });
    if (o.top_k <= 0) throw DomainError("--top-k must be positive");
    ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(o.top_k)));
    for (const auto& [id, score] : ranked) lines += ranked_example_json(id, score);
  } else {
    throw ConfigError("select needs either --query (bm25 over --data) or --query-id (embedding over --dump)");
  }
  emit(lines, o.out);
  return 0;
}

// ---------------------------------------------------------------- abt

struct AbtOpts {
  std::string data;
  std::string lt = "zsl";
  std::string model = "mock-model";
  std::string base_url;
  std::string api_key_env;
  std::string train;
  std::string image_root;
  std::string out_records = "records.jsonl";
  std::string out_summary;
  int bootstrap_n = 1000;
  std::uint64_t seed = 1987;
  int max_concurrency = 1;
  int sample_n = 0;  // 0 = whole split
  int max_tokens = 64;
  double temperature = 0.0;
  int timeout_ms = 30000;
  int max_retries = 3;
  // analyze mode
  bool analyze = false;
  std::vector<std::string> lt_dumps;  // lt=manifest
  int layer = 0;
  std::string out;
};

int run_abt_analyze(const AbtOpts& o) {
  if (o.lt_dumps.empty()) throw ConfigError("--analyze requires at least one --lt-dump lt=manifest");
  const std::vector<Meme> memes = load_memes(o.data);
  std::map<std::string, int> label_by_id;
  for (const auto& m : memes) {
    if (!m.label) throw InputError("meme " + m.id + " is unlabeled; analysis needs labels");
    label_by_id[m.id] = *m.label;
  }
  WeightDiffReport report;
  for (const auto& spec_str : o.lt_dumps) {
    const auto eq = spec_str.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--lt-dump expects lt=manifest, got '" + spec_str + "'");
    const LearningType lt = learning_type_from_string(spec_str.substr(0, eq));
    const DumpStore store = DumpStore::open(spec_str.substr(eq + 1));
    DistanceSpec spec;
    spec.a = Segment::query;
    spec.b = Segment::answer;
    spec.layer = o.layer;
    spec.per_dimension = true;
    const DistanceMatrix dist = distances(store, spec);
    std::vector<int> labels;
    labels.reserve(dist.sample_ids.size());
    for (const auto& id : dist.sample_ids) {
      auto it = label_by_id.find(id);
      if (it == label_by_id.end()) throw InputError("dump sample " + id + " not in the dataset");
      labels.push_back(it->second);
    }
    report.per_dim[lt] = per_dimension_weights(dist.values, labels);
  }
  emit(weight_diff_report_json(report), o.out);
  return 0;
}

int run_abt(const AbtOpts& o) {
  if (o.analyze) return run_abt_analyze(o);
  if (o.base_url.empty()) throw ConfigError("--base-url is required");
  const LearningType lt = learning_type_from_string(o.lt);

  std::vector<Meme> memes = load_memes(o.data);
  if (o.sample_n < 0) throw DomainError("--sample-n must be nonnegative");
  if (o.sample_n > 0 && static_cast<std::size_t>(o.sample_n) < memes.size()) {
    std::vector<std::size_t> idx(memes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_stream(o.seed, 0x73616d706c65ull));  // dedicated sampling stream
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(o.sample_n));
    std::sort(idx.begin(), idx.end());  // keep dataset order
    std::vector<Meme> picked;
    picked.reserve(idx.size());
    for (auto i : idx) picked.push_back(std::move(memes[i]));
    memes = std::move(picked);
  }

  std::vector<Meme> train;
  if (!o.train.empty()) train = load_memes(o.train);

  const std::string root =
      o.image_root.empty() ? fs::path(o.data).parent_path().string() : o.image_root;

  ClientConfig cc;
  cc.base_url = o.base_url;
  cc.api_key_env = o.api_key_env;
  cc.timeout_ms = o.timeout_ms;
  cc.max_retries = o.max_retries;
  cc.max_concurrency = o.max_concurrency;
  cc.jitter_seed = o.seed;
  ChatClient client(cc);

  AbtConfig acfg;
  acfg.model = o.model;
  acfg.max_tokens = o.max_tokens;
  acfg.temperature = o.temperature;
  acfg.bootstrap_n = o.bootstrap_n;
  acfg.seed = o.seed;
  acfg.max_concurrency = o.max_concurrency;
  acfg.image_loader = [root](const std::string& ref) -> std::optional<std::string> {
    std::ifstream in(fs::path(root) / ref, std::ios::binary);
    if (!in) return std::nullopt;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
  };

  const ExperimentResult result = run_experiment(memes, lt, client, acfg, train);
  write_run_records(result.records, o.out_records);
  emit(experiment_summary_json(result, lt, o.out_records), o.out_summary);
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportOpts {
  std::string from;
  std::string out_dir;
};

int run_report(const ReportOpts& o) {
  const std::string out_dir = o.out_dir.empty() ? o.from : o.out_dir;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(o.from)) {
    if (e.is_regular_file() && e.path().extension() == ".json") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw InputError("no report tables (*.json) in " + o.from);

  for (const auto& p : inputs) {
    const ReportTable table = load_report_table(p.string());
    const fs::path out = fs::path(out_dir) / (p.stem().string() + ".csv");
    write_text_file(out.string(), render_csv(table));
    std::cout << out.string() << "\n";
  }
  return 0;
}

template <typename Opts>
int guarded_run(int (*fn)(const Opts&), const Opts& opts) {
  try {
    return fn(opts);
  } catch (const std::invalid_argument& ex) {
    std::cerr << error_json("validation", ex.what());
    return 1;
  } catch (const std::runtime_error& ex) {
    std::cerr << error_json("runtime", ex.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-context learning analysis toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command line flags take precedence");

  DualityOpts duality;
  auto* cmd_duality = app.add_subcommand("duality", "attention vs one-step-update agreement sweep");
  cmd_duality->add_option("--trials", duality.trials, "random instances to draw");
  cmd_duality->add_option("--kernel", duality.kernel, "identity | exp_feature | softmax_normalized");
  cmd_duality->add_option("--tol", duality.tol, "max abs diff allowed per instance");
  cmd_duality->add_option("--seed", duality.seed, "rng seed");
  cmd_duality->add_option("--max-depth", duality.max_depth, "largest embedding depth drawn");
  cmd_duality->add_option("--max-context", duality.max_context, "largest context length drawn");
  cmd_duality->add_option("--out", duality.out, "also write the report JSON here");

  FitLmmOpts lmm;
  auto* cmd_lmm = app.add_subcommand("fit-lmm", "linear mixed model from a CSV file");
  cmd_lmm->add_option("--data", lmm.data, "CSV file")->required()->check(CLI::ExistingFile);
  cmd_lmm->add_option("--y-col", lmm.y_col, "response column")->required();
  cmd_lmm->add_option("--fixed-cols", lmm.fixed_cols, "fixed-effect columns")->delimiter(',');
  cmd_lmm->add_option("--group-col", lmm.group_col, "grouping column")->required();
  cmd_lmm->add_option("--random-cols", lmm.random_cols,
                      "random-effect columns (default: per-group intercept)")
      ->delimiter(',');
  cmd_lmm->add_flag("--interact", lmm.interact, "add fixed x random product columns");
  cmd_lmm->add_flag("--no-intercept", lmm.no_intercept, "drop the fixed intercept column");
  cmd_lmm->add_flag("--r2", lmm.r2, "report marginal/conditional R^2");
  cmd_lmm->add_option("--out", lmm.out, "also write the fit JSON here");

  ShiftMapOpts sm;
  auto* cmd_sm = app.add_subcommand("shift-map", "fit the zsl -> icl representation map");
  cmd_sm->add_option("--zsl-dump", sm.zsl_dumps, "zsl manifest.json (repeatable)")->required();
  cmd_sm->add_option("--icl-dump", sm.icl_dumps, "icl manifest.json (repeatable)")->required();
  cmd_sm->add_option("--layer", sm.layer, "layer to read");
  cmd_sm->add_option("--segment", sm.segment, "segment to map (default query)");
  cmd_sm->add_option("--seed", sm.train.seed, "rng seed");
  cmd_sm->add_option("--epochs", sm.train.epochs, "training epochs");
  cmd_sm->add_option("--lr", sm.train.lr, "learning rate");
  cmd_sm->add_option("--batch", sm.train.batch, "minibatch size");
  cmd_sm->add_option("--weight-decay", sm.train.weight_decay, "decoupled weight decay");
  cmd_sm->add_option("--holdout", sm.train.holdout, "holdout fraction");
  cmd_sm->add_flag("--baseline", sm.baseline, "fit without the per-index term");
  cmd_sm->add_flag("--skip-distance", sm.skip_distance, "skip the query/answer distance regression");
  cmd_sm->add_option("--out", sm.out, "also write the fit JSON here");

  SelectOpts sel;
  auto* cmd_sel = app.add_subcommand("select", "rank in-context example candidates");
  cmd_sel->add_option("--data", sel.data, "memes JSONL (bm25 mode)")->check(CLI::ExistingFile);
  cmd_sel->add_option("--query", sel.query, "query text (bm25 mode)");
  cmd_sel->add_option("--dump", sel.dump, "manifest.json (embedding mode)")->check(CLI::ExistingFile);
  cmd_sel->add_option("--query-id", sel.query_id, "query sample id (embedding mode)");
  cmd_sel->add_option("--segment", sel.segment, "segment to embed (default query)");
  cmd_sel->add_option("--layer", sel.layer, "layer to read");
  cmd_sel->add_option("--metric", sel.metric, "cosine | euclidean | squared_euclidean");
  cmd_sel->add_option("--top-k", sel.top_k, "entries to emit");
  cmd_sel->add_option("--out", sel.out, "also write the ranking JSONL here");

  AbtOpts abt;
  auto* cmd_abt = app.add_subcommand("abt", "run a zsl/icl/abt classification experiment");
  cmd_abt->add_option("--data", abt.data, "memes JSONL")->required()->check(CLI::ExistingFile);
  cmd_abt->add_option("--lt", abt.lt, "zsl | icl | abt");
  cmd_abt->add_option("--model", abt.model, "model name sent to the server");
  cmd_abt->add_option("--base-url", abt.base_url, "chat completions base url");
  cmd_abt->add_option("--api-key-env", abt.api_key_env,
                      "NAME of the env var holding the bearer token");
  cmd_abt->add_option("--train", abt.train, "training split JSONL (icl example pool)")
      ->check(CLI::ExistingFile);
  cmd_abt->add_option("--image-root", abt.image_root, "directory img paths resolve against");
  cmd_abt->add_option("--out-records", abt.out_records, "RunRecords JSONL path");
  cmd_abt->add_option("--out-summary", abt.out_summary, "also write the summary JSON here");
  cmd_abt->add_option("--bootstrap-n", abt.bootstrap_n, "bootstrap resamples for the f1 CI");
  cmd_abt->add_option("--seed", abt.seed, "rng seed");
  cmd_abt->add_option("--max-concurrency", abt.max_concurrency, "requests in flight");
  cmd_abt->add_option("--sample-n", abt.sample_n, "uniformly sample this many memes (0 = all)");
  cmd_abt->add_option("--max-tokens", abt.max_tokens, "completion budget per call");
  cmd_abt->add_option("--temperature", abt.temperature, "sampling temperature");
  cmd_abt->add_option("--timeout-ms", abt.timeout_ms, "per-request timeout");
  cmd_abt->add_option("--max-retries", abt.max_retries, "transport retries per call");
  cmd_abt->add_flag("--analyze", abt.analyze, "offline per-dimension weight analysis");
  cmd_abt->add_option("--lt-dump", abt.lt_dumps, "lt=manifest.json pairs (analyze mode)");
  cmd_abt->add_option("--layer", abt.layer, "layer to read (analyze mode)");
  cmd_abt->add_option("--out", abt.out, "also write the analysis JSON here");

  ReportOpts rep;
  auto* cmd_rep = app.add_subcommand("report", "render stored result tables to CSV");
  cmd_rep->add_option("--from", rep.from, "directory of table JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd_rep->add_option("--out-dir", rep.out_dir, "CSV output directory (default: --from)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << error_json("usage", e.what());
    std::cerr << app.help();
    return 1;
  }

  if (cmd_duality->parsed()) return guarded_run(run_duality, duality);
  if (cmd_lmm->parsed()) return guarded_run(run_fit_lmm, lmm);
  if (cmd_sm->parsed()) return guarded_run(run_shift_map, sm);
  if (cmd_sel->parsed()) return guarded_run(run_select, sel);
  if (cmd_abt->parsed()) return guarded_run(run_abt, abt);
  if (cmd_rep->parsed()) return guarded_run(run_report, rep);
  return 0;
}
