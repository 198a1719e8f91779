#include "iclkit/dataset.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

using nlohmann::json;

namespace iclkit {

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& ex) {
    throw CorruptionError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + ex.what());
  }
}

std::string id_field(const json& j, const std::string& ctx) {
  if (!j.contains("id")) throw CorruptionError(ctx + ": missing id");
  const auto& v = j.at("id");
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw CorruptionError(ctx + ": id must be a string or integer");
}

// Each non-empty line must be a JSON object; blank lines are tolerated.
template <typename Fn>
void for_each_line_object(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j = parse_line(line, path, lineno);
    if (!j.is_object())
      throw CorruptionError(path + ":" + std::to_string(lineno) + ": expected an object");
    fn(j, lineno);
  }
}

}  // namespace

std::vector<Meme> load_memes(const std::string& path) {
  std::vector<Meme> memes;
  std::set<std::string> seen;
  for_each_line_object(path, [&](const json& j, std::size_t lineno) {
    const std::string ctx = path + ":" + std::to_string(lineno);
    Meme m;
    m.id = id_field(j, ctx);
    try {
      m.image_ref = j.at("img").get<std::string>();
      m.text = j.at("text").get<std::string>();
      if (j.contains("label") && !j.at("label").is_null())
        m.label = j.at("label").get<int>();
    } catch (const json::exception& ex) {
      throw CorruptionError(ctx + ": " + ex.what());
    }
    if (m.label && *m.label != 0 && *m.label != 1)
      throw CorruptionError(ctx + ": label must be 0 or 1");
    if (!seen.insert(m.id).second) throw InputError("duplicate meme id: " + m.id);
    memes.push_back(std::move(m));
  });
  return memes;
}

void save_memes(const std::vector<Meme>& memes, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write: " + path);
  for (const auto& m : memes) {
    json j{{"id", m.id}, {"img", m.image_ref}, {"text", m.text}};
    if (m.label) j["label"] = *m.label;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<CorpusEntry> corpus_from_memes(const std::vector<Meme>& memes) {
  std::vector<CorpusEntry> corpus;
  corpus.reserve(memes.size());
  for (const auto& m : memes) {
    CorpusEntry e;
    e.id = m.id;
    e.text = m.text;
    e.label = m.label;
    corpus.push_back(std::move(e));
  }
  return corpus;
}

std::string run_record_json(const RunRecord& rec) {
  json j;
  j["meme_id"] = rec.meme_id;
  j["learning_type"] = to_string(rec.learning_type);
  j["raw_reply"] = rec.raw_reply;
  j["examples_used"] = rec.examples_used;
  if (rec.anchor_text) j["anchor_text"] = *rec.anchor_text;
  if (rec.parsed_label) j["parsed_label"] = *rec.parsed_label;
  if (rec.error) j["error"] = *rec.error;
  return j.dump();
}

void write_run_records(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write: " + path);
  for (const auto& rec : records) out << run_record_json(rec) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

std::vector<RunRecord> read_run_records(const std::string& path) {
  std::vector<RunRecord> records;
  for_each_line_object(path, [&](const json& j, std::size_t lineno) {
    const std::string ctx = path + ":" + std::to_string(lineno);
    RunRecord rec;
    try {
      rec.meme_id = j.at("meme_id").get<std::string>();
      rec.learning_type = learning_type_from_string(j.at("learning_type").get<std::string>());
      rec.raw_reply = j.value("raw_reply", std::string{});
      if (j.contains("examples_used"))
        rec.examples_used = j.at("examples_used").get<std::vector<std::string>>();
      if (j.contains("anchor_text")) rec.anchor_text = j.at("anchor_text").get<std::string>();
      if (j.contains("parsed_label")) rec.parsed_label = j.at("parsed_label").get<int>();
      if (j.contains("error")) rec.error = j.at("error").get<std::string>();
    } catch (const json::exception& ex) {
      throw CorruptionError(ctx + ": " + ex.what());
    } catch (const DomainError& ex) {
      throw CorruptionError(ctx + ": " + ex.what());
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::size_t CsvTable::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InputError("no such column: " + name);
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t idx = col_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& cell = rows[r][idx];
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
      throw InputError("column " + name + ", row " + std::to_string(r + 1) +
                       ": not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> CsvTable::string_column(const std::string& name) const {
  const std::size_t idx = col_index(name);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[idx]);
  return out;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (table.columns.empty()) {
      table.columns = std::move(cells);
      continue;
    }
    if (cells.size() != table.columns.size())
      throw CorruptionError(path + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(table.columns.size()) + " cells, got " +
                            std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.columns.empty()) throw EmptyInputError("empty CSV: " + path);
  return table;
}

}  // namespace iclkit
