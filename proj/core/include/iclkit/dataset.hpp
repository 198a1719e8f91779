#pragma once

#include <string>
#include <vector>

#include "iclkit/abt.hpp"
#include "iclkit/selection.hpp"

namespace iclkit {

// Hateful-memes JSONL in the public challenge schema: one object per line
// with id, img, text and an optional 0/1 label. Numeric ids are accepted and
// stringified so the public files drop in unchanged.
std::vector<Meme> load_memes(const std::string& path);
void save_memes(const std::vector<Meme>& memes, const std::string& path);

// Text-only view for ranking; the meme id and text carry over, labels too.
std::vector<CorpusEntry> corpus_from_memes(const std::vector<Meme>& memes);

// RunRecord JSONL round-trip (one record per line, keys sorted).
std::string run_record_json(const RunRecord& rec);
void write_run_records(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_run_records(const std::string& path);

// Minimal CSV reader for tabular numeric inputs (fit-lmm). Cells are kept as
// strings; column accessors convert on demand.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t col_index(const std::string& name) const;  // InputError if absent
  std::vector<double> numeric_column(const std::string& name) const;
  std::vector<std::string> string_column(const std::string& name) const;
};

CsvTable load_csv(const std::string& path);

}  // namespace iclkit
