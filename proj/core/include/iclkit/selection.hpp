#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "iclkit/distance.hpp"
#include "iclkit/errors.hpp"

namespace iclkit {

struct CorpusEntry {
  std::string id;
  std::string text;
  std::optional<Eigen::VectorXd> embedding;
  std::optional<int> label;  // 0 benign, 1 hateful
};

// Lowercased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Index {
  double k1 = 1.2;
  double b = 0.75;
  std::unordered_map<std::string, int> doc_freq;
  std::vector<std::unordered_map<std::string, int>> term_freq;  // per document
  std::vector<int> doc_len;
  std::vector<std::string> doc_ids;
  double avg_len = 0.0;

  static Bm25Index build(const std::vector<CorpusEntry>& corpus, double k1 = 1.2,
                         double b = 0.75);

  std::size_t size() const { return doc_ids.size(); }
  // ln((N - df + 0.5) / (df + 0.5) + 1): always nonnegative.
  double idf(const std::string& term) const;
  // Okapi score of one document; duplicate query terms count once.
  double score(std::string_view query, std::size_t doc) const;
};

// Argmin-distance retrieval; exact ties go to the lexicographically
// smallest id.
std::string nearest_by_embedding(const Eigen::VectorXd& query,
                                 const std::vector<CorpusEntry>& corpus, Distance metric);

// Scores every document, sorts by descending score (ties by ascending id),
// returns at most top_k entries.
std::vector<std::pair<std::string, double>> bm25_rank(std::string_view query,
                                                      const Bm25Index& index, int top_k);

// All (benign, hateful) pairs sharing exactly identical text; unlabeled
// entries are ignored. Group order follows the text sort, inner order the
// id sort, so the output is permutation-invariant.
std::vector<std::pair<CorpusEntry, CorpusEntry>> confounder_pairs(
    const std::vector<CorpusEntry>& dataset);

struct OneShotPick {
  CorpusEntry benign;
  CorpusEntry hateful;
};

// Top-BM25 training entry of each label class for the query text. The index
// must have been built over `train` in order.
OneShotPick select_one_shot(std::string_view query_text, const std::vector<CorpusEntry>& train,
                            const Bm25Index& index);

}  // namespace iclkit
