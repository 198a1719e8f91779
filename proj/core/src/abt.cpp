#include "iclkit/abt.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>
#include <unordered_map>

#include "iclkit/mixed_effects.hpp"
#include "iclkit/selection.hpp"

namespace iclkit {

namespace {

void require_image(const Meme& meme, const char* where) {
  if (meme.image_ref.empty())
    throw InputError(std::string(where) + ": meme " + meme.id + " has no image reference");
}

std::string gold_word(const Meme& meme, const char* where) {
  if (!meme.label)
    throw InputError(std::string(where) + ": example " + meme.id + " has no label");
  return *meme.label == 0 ? "benign" : "hateful";
}

PromptTurn system_turn() {
  return {Role::system, {PromptPart::text_part(kSystemPrompt)}};
}

PromptTurn question_turn(const Meme& meme) {
  return {Role::user,
          {PromptPart::image_part(meme.image_ref),
           PromptPart::text_part(std::string(kLabelQuestion) + "\n" + meme.text)}};
}

RenderOptions render_options(const AbtConfig& config) {
  RenderOptions opts;
  opts.model = config.model;
  opts.temperature = config.temperature;
  opts.max_tokens = config.max_tokens;
  opts.image_loader = config.image_loader;
  opts.inline_limit = config.inline_limit;
  return opts;
}

}  // namespace

PromptScript build_caption_request(const Meme& meme) {
  require_image(meme, "build_caption_request");
  PromptScript script;
  script.learning_type = LearningType::abt;
  script.turns.push_back(system_turn());
  script.turns.push_back({Role::user,
                          {PromptPart::image_part(meme.image_ref),
                           PromptPart::text_part(kCaptionRequest)}});
  return script;
}

PromptScript build_prompt(LearningType lt, const Meme& meme,
                          const std::optional<std::pair<Meme, Meme>>& examples,
                          const std::optional<std::string>& anchor, bool benign_first) {
  require_image(meme, "build_prompt");
  PromptScript script;
  script.learning_type = lt;
  script.turns.push_back(system_turn());

  if (lt == LearningType::zsl) {
    script.turns.push_back(question_turn(meme));
    return script;
  }

  if (lt == LearningType::icl) {
    if (!examples) throw InputError("build_prompt: icl needs an example pair");
    const Meme& first = benign_first ? examples->first : examples->second;
    const Meme& second = benign_first ? examples->second : examples->first;
    for (const Meme* ex : {&first, &second}) {
      require_image(*ex, "build_prompt");
      script.turns.push_back(question_turn(*ex));
      script.turns.push_back({Role::assistant, {PromptPart::text_part(gold_word(*ex, "build_prompt"))}});
    }
    script.turns.push_back(question_turn(meme));
    return script;
  }

  if (!anchor) throw InputError("build_prompt: abt needs an anchor caption");
  script.turns.push_back({Role::user,
                          {PromptPart::image_part(meme.image_ref),
                           PromptPart::text_part(kCaptionRequest)}});
  script.turns.push_back({Role::assistant, {PromptPart::text_part(*anchor)}});
  script.turns.push_back({Role::user,
                          {PromptPart::text_part(std::string(kComparisonQuestion) + "\n" +
                                                 meme.text)}});
  return script;
}

namespace {

std::string strip_anchor(std::string text) {
  auto trim = [](std::string& s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  };
  trim(text);
  while (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') &&
         text.back() == text.front()) {
    text = text.substr(1, text.size() - 2);
    trim(text);
  }
  return text;
}

}  // namespace

std::string generate_anchor(const Meme& meme, ChatClient& client, const AbtConfig& config) {
  RenderOptions opts = render_options(config);
  opts.temperature = 0.0;  // greedy decoding realizes the argmax caption
  ChatRequest request = render_script(build_caption_request(meme), opts);
  Completion reply = client.complete(request);
  std::string anchor = strip_anchor(reply.text);
  if (anchor.empty())
    throw GenerationError("generate_anchor: empty caption for meme " + meme.id);
  return anchor;
}

std::optional<int> parse_label_reply(std::string_view reply) {
  std::size_t start = 0;
  while (start < reply.size() && std::isspace(static_cast<unsigned char>(reply[start]))) ++start;
  std::size_t end = start;
  while (end < reply.size() && !std::isspace(static_cast<unsigned char>(reply[end]))) ++end;
  std::string token(reply.substr(start, end - start));
  while (!token.empty() && !std::isalnum(static_cast<unsigned char>(token.front())))
    token.erase(token.begin());
  while (!token.empty() && !std::isalnum(static_cast<unsigned char>(token.back())))
    token.pop_back();
  std::transform(token.begin(), token.end(), token.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (token == "benign") return 0;
  if (token == "hateful") return 1;
  return std::nullopt;
}

RunRecord classify(const Meme& meme, LearningType lt, ChatClient& client,
                   const AbtConfig& config,
                   const std::optional<std::pair<Meme, Meme>>& examples,
                   std::optional<std::string> anchor) {
  RunRecord record;
  record.meme_id = meme.id;
  record.learning_type = lt;
  if (lt == LearningType::abt && !anchor) anchor = generate_anchor(meme, client, config);
  if (lt == LearningType::abt) record.anchor_text = anchor;
  if (lt == LearningType::icl && examples) {
    record.examples_used.push_back(examples->first.id);
    record.examples_used.push_back(examples->second.id);
  }

  PromptScript script = build_prompt(lt, meme, examples, anchor, config.benign_first);
  Completion reply = client.complete(render_script(script, render_options(config)));
  record.raw_reply = reply.text;
  if (auto label = parse_label_reply(reply.text)) {
    record.parsed_label = *label;
  } else {
    std::string excerpt = reply.text.size() > 120 ? reply.text.substr(0, 120) + "..." : reply.text;
    record.error = "unparseable reply: " + excerpt;
  }
  return record;
}

ExperimentResult run_experiment(const std::vector<Meme>& dataset, LearningType lt,
                                ChatClient& client, const AbtConfig& config,
                                const std::vector<Meme>& train) {
  if (dataset.empty()) throw EmptyInputError("run_experiment: empty dataset");
  for (const auto& meme : dataset)
    if (!meme.label) throw InputError("run_experiment: meme " + meme.id + " has no label");

  // BM25 index over the training texts, queried per meme inside the workers.
  std::vector<CorpusEntry> corpus;
  Bm25Index index;
  std::unordered_map<std::string, const Meme*> train_by_id;
  if (lt == LearningType::icl) {
    if (train.empty()) throw InputError("run_experiment: icl needs a training split");
    corpus.reserve(train.size());
    for (const auto& meme : train) {
      corpus.push_back({meme.id, meme.text, std::nullopt, meme.label});
      train_by_id[meme.id] = &meme;
    }
    index = Bm25Index::build(corpus);
  }

  std::vector<RunRecord> records(dataset.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= dataset.size()) return;
      const Meme& meme = dataset[i];
      try {
        std::optional<std::pair<Meme, Meme>> examples;
        if (lt == LearningType::icl) {
          OneShotPick pick = select_one_shot(meme.text, corpus, index);
          examples = std::make_pair(*train_by_id.at(pick.benign.id),
                                    *train_by_id.at(pick.hateful.id));
        }
        records[i] = classify(meme, lt, client, config, examples);
      } catch (const std::exception& e) {
        RunRecord failed;
        failed.meme_id = meme.id;
        failed.learning_type = lt;
        failed.error = e.what();
        records[i] = failed;
      }
    }
  };
  auto n_workers = std::max(1, std::min<int>(config.max_concurrency,
                                             static_cast<int>(dataset.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  ExperimentResult result;
  result.records = std::move(records);
  std::vector<double> preds;
  std::vector<int> labels;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (result.records[i].parsed_label) {
      preds.push_back(static_cast<double>(*result.records[i].parsed_label));
      labels.push_back(*dataset[i].label);
    } else {
      ++result.n_errors;
    }
  }
  if (preds.empty()) throw ExperimentError("run_experiment: no record produced a parsed label");
  result.f1_ci =
      bootstrap_metric_ci(preds, labels, Metric::f1, config.bootstrap_n, config.seed);
  return result;
}

PerDimFit per_dimension_weights(const Eigen::MatrixXd& distances,
                                const std::vector<int>& labels) {
  const Eigen::Index n = distances.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ShapeError("per_dimension_weights: row/label count mismatch");
  if (n < 2) throw InputError("per_dimension_weights: need at least 2 rows");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int l = labels[static_cast<std::size_t>(i)];
    if (l != 0 && l != 1) throw DomainError("per_dimension_weights: labels must be 0/1");
    y[i] = static_cast<double>(l);
  }

  PerDimFit fit;
  const Eigen::Index d = distances.cols();
  fit.weights = Eigen::VectorXd::Zero(d);
  fit.intercepts = Eigen::VectorXd::Zero(d);
  const double y_mean = y.mean();
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd x = distances.col(j);
    double x_mean = x.mean();
    Eigen::VectorXd xc = x.array() - x_mean;
    double var_x = xc.squaredNorm();
    if (var_x == 0.0) {
      fit.constant_dims.push_back(static_cast<int>(j));
      fit.intercepts[j] = y_mean;
      continue;
    }
    double slope = xc.dot(y) / var_x;
    fit.weights[j] = slope;
    fit.intercepts[j] = y_mean - slope * x_mean;
  }
  fit.intercept = d == 0 ? 0.0 : fit.intercepts.mean();
  fit.auc = fit_linear_probe(distances, y, ProbeTask::binary).score;
  return fit;
}

std::pair<Eigen::VectorXd, double> weight_difference(const WeightDiffReport& report,
                                                     LearningType lt_a, LearningType lt_b) {
  auto a = report.per_dim.find(lt_a);
  auto b = report.per_dim.find(lt_b);
  if (a == report.per_dim.end() || b == report.per_dim.end())
    throw InputError("weight_difference: learning type missing from report");
  if (a->second.weights.size() != b->second.weights.size())
    throw ShapeError("weight_difference: weight dimensions differ");
  return {a->second.weights - b->second.weights,
          a->second.intercept - b->second.intercept};
}

}  // namespace iclkit
