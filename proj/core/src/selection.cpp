#include "iclkit/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

namespace iclkit {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Bm25Index Bm25Index::build(const std::vector<CorpusEntry>& corpus, double k1, double b) {
  if (!(k1 >= 0.0) || !(b >= 0.0 && b <= 1.0))
    throw DomainError("Bm25Index: k1 must be >= 0 and b in [0,1]");
  Bm25Index index;
  index.k1 = k1;
  index.b = b;
  long total_len = 0;
  for (const auto& entry : corpus) {
    auto tokens = tokenize(entry.text);
    std::unordered_map<std::string, int> tf;
    for (auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) ++index.doc_freq[term];
    total_len += static_cast<long>(tokens.size());
    index.doc_len.push_back(static_cast<int>(tokens.size()));
    index.doc_ids.push_back(entry.id);
    index.term_freq.push_back(std::move(tf));
  }
  index.avg_len = corpus.empty()
                      ? 0.0
                      : static_cast<double>(total_len) / static_cast<double>(corpus.size());
  return index;
}

double Bm25Index::idf(const std::string& term) const {
  auto it = doc_freq.find(term);
  double df = it == doc_freq.end() ? 0.0 : static_cast<double>(it->second);
  double n = static_cast<double>(size());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

double Bm25Index::score(std::string_view query, std::size_t doc) const {
  if (doc >= size()) throw InputError("Bm25Index::score: document index out of range");
  auto terms = tokenize(query);
  std::set<std::string> unique(terms.begin(), terms.end());
  const auto& tf = term_freq[doc];
  double len_norm = avg_len == 0.0
                        ? 1.0
                        : 1.0 - b + b * static_cast<double>(doc_len[doc]) / avg_len;
  double total = 0.0;
  for (const auto& term : unique) {
    auto it = tf.find(term);
    if (it == tf.end()) continue;
    double f = static_cast<double>(it->second);
    total += idf(term) * f * (k1 + 1.0) / (f + k1 * len_norm);
  }
  return total;
}

std::string nearest_by_embedding(const Eigen::VectorXd& query,
                                 const std::vector<CorpusEntry>& corpus, Distance metric) {
  if (corpus.empty()) throw EmptyInputError("nearest_by_embedding: empty corpus");
  const std::string* best_id = nullptr;
  double best_dist = 0.0;
  for (const auto& entry : corpus) {
    if (!entry.embedding)
      throw InputError("nearest_by_embedding: entry " + entry.id + " has no embedding");
    double d = distance(metric, query, *entry.embedding);
    if (!best_id || d < best_dist || (d == best_dist && entry.id < *best_id)) {
      best_id = &entry.id;
      best_dist = d;
    }
  }
  return *best_id;
}

std::vector<std::pair<std::string, double>> bm25_rank(std::string_view query,
                                                      const Bm25Index& index, int top_k) {
  if (top_k <= 0) throw DomainError("bm25_rank: top_k must be positive");
  if (index.size() == 0) throw EmptyInputError("bm25_rank: empty index");
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i)
    ranked.emplace_back(index.doc_ids[i], index.score(query, i));
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(top_k))
    ranked.resize(static_cast<std::size_t>(top_k));
  return ranked;
}

std::vector<std::pair<CorpusEntry, CorpusEntry>> confounder_pairs(
    const std::vector<CorpusEntry>& dataset) {
  std::map<std::string, std::vector<const CorpusEntry*>> by_text;
  for (const auto& entry : dataset)
    if (entry.label) by_text[entry.text].push_back(&entry);

  std::vector<std::pair<CorpusEntry, CorpusEntry>> pairs;
  for (auto& [text, entries] : by_text) {
    std::sort(entries.begin(), entries.end(),
              [](const CorpusEntry* a, const CorpusEntry* b) { return a->id < b->id; });
    for (const auto* benign : entries) {
      if (*benign->label != 0) continue;
      for (const auto* hateful : entries) {
        if (*hateful->label != 1) continue;
        pairs.emplace_back(*benign, *hateful);
      }
    }
  }
  return pairs;
}

OneShotPick select_one_shot(std::string_view query_text, const std::vector<CorpusEntry>& train,
                            const Bm25Index& index) {
  if (train.empty()) throw EmptyInputError("select_one_shot: empty training set");
  if (index.size() != train.size())
    throw InputError("select_one_shot: index covers " + std::to_string(index.size()) +
                     " documents but the training set has " + std::to_string(train.size()));
  const CorpusEntry* best[2] = {nullptr, nullptr};
  double best_score[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& entry = train[i];
    if (!entry.label) continue;
    int cls = *entry.label;
    if (cls != 0 && cls != 1)
      throw DomainError("select_one_shot: label of " + entry.id + " is not binary");
    double s = index.score(query_text, i);
    if (!best[cls] || s > best_score[cls] ||
        (s == best_score[cls] && entry.id < best[cls]->id)) {
      best[cls] = &entry;
      best_score[cls] = s;
    }
  }
  if (!best[0] || !best[1])
    throw SelectionError("select_one_shot: training set lacks a label class");
  return {*best[0], *best[1]};
}

}  // namespace iclkit
