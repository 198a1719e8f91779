#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iclkit/client.hpp"
#include "iclkit/errors.hpp"
#include "iclkit/prompt.hpp"
#include "iclkit/stats.hpp"

namespace iclkit {

struct Meme {
  std::string id;
  std::string image_ref;  // file path or URL
  std::string text;
  std::optional<int> label;  // 0 benign, 1 hateful
};

// One classification attempt. Exactly one of parsed_label / error is set.
struct RunRecord {
  std::string meme_id;
  LearningType learning_type = LearningType::zsl;
  std::optional<std::string> anchor_text;  // abt only
  std::string raw_reply;
  std::optional<int> parsed_label;
  std::vector<std::string> examples_used;
  std::optional<std::string> error;
};

struct AbtConfig {
  std::string model;
  int max_tokens = 64;
  double temperature = 0.0;
  int bootstrap_n = 1000;
  std::uint64_t seed = 1987;
  int max_concurrency = 1;
  bool benign_first = true;  // example order in icl prompts
  std::function<std::optional<std::string>(const std::string&)> image_loader;
  std::size_t inline_limit = 20ull * 1024 * 1024;
};

// Prompt wording shared by every learning type.
inline constexpr const char* kSystemPrompt =
    "You are a helpful language and vision assistant. You are able to understand the visual "
    "content that the user provides, and assist the user with a variety of tasks using "
    "natural language.";
inline constexpr const char* kCaptionRequest = "Give me one caption that fits with this image.";
inline constexpr const char* kComparisonQuestion =
    "In comparison with that caption, is the following caption hateful or benign? Answer "
    "with a single word.";
inline constexpr const char* kLabelQuestion =
    "Is the following caption hateful or benign? Answer with a single word.";

// The first anchor round on its own: system turn plus the caption request
// over the meme's image.
PromptScript build_caption_request(const Meme& meme);

// zsl: one image+question turn. icl: the two labeled examples as prior
// turns with gold answers, then the query. abt: caption request, assistant
// anchor, comparison question; the image appears exactly once, up top.
PromptScript build_prompt(LearningType lt, const Meme& meme,
                          const std::optional<std::pair<Meme, Meme>>& examples,
                          const std::optional<std::string>& anchor, bool benign_first = true);

// Runs the caption round at temperature 0 and returns the reply stripped of
// surrounding whitespace and quotes.
std::string generate_anchor(const Meme& meme, ChatClient& client, const AbtConfig& config);

// First token of the lowercased reply, punctuation trimmed; only
// benign -> 0 / hateful -> 1 parse, everything else is nullopt.
std::optional<int> parse_label_reply(std::string_view reply);

// One full classification round trip. Missing abt anchors are generated
// first. Unparseable replies come back as error records; transport and
// generation failures propagate as exceptions.
RunRecord classify(const Meme& meme, LearningType lt, ChatClient& client,
                   const AbtConfig& config,
                   const std::optional<std::pair<Meme, Meme>>& examples = std::nullopt,
                   std::optional<std::string> anchor = std::nullopt);

struct ExperimentResult {
  std::vector<RunRecord> records;  // dataset order
  BootstrapResult f1_ci;
  int n_errors = 0;
};

// Classifies the whole dataset with up to max_concurrency calls in flight.
// Per-meme failures become error records; the f1 bootstrap runs on the
// parsed records only. icl picks one example per class from `train` by BM25.
ExperimentResult run_experiment(const std::vector<Meme>& dataset, LearningType lt,
                                ChatClient& client, const AbtConfig& config,
                                const std::vector<Meme>& train = {});

// Per-dimension univariate fit y ~ w_j * d_j + c_j; `intercept` is the mean
// of the per-dimension intercepts, `auc` comes from the full linear probe.
struct PerDimFit {
  Eigen::VectorXd weights;
  Eigen::VectorXd intercepts;
  double intercept = 0.0;
  std::vector<int> constant_dims;  // zero-variance columns, weight forced to 0
  double auc = 0.0;
};

PerDimFit per_dimension_weights(const Eigen::MatrixXd& distances,
                                const std::vector<int>& labels);

struct WeightDiffReport {
  std::map<LearningType, PerDimFit> per_dim;
};

// Elementwise weight and intercept differences between two learning types.
std::pair<Eigen::VectorXd, double> weight_difference(const WeightDiffReport& report,
                                                     LearningType lt_a, LearningType lt_b);

}  // namespace iclkit
