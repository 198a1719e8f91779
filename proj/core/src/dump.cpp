#include "iclkit/dump.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace iclkit {

namespace {

// Explicit little-endian codec so dumps are portable and reads stay bit-exact
// (signed zeros, subnormals, inf/nan payloads all round-trip).
void put_f32le(float v, std::string& out) {
  const auto u = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>((u >> 8) & 0xff));
  out.push_back(static_cast<char>((u >> 16) & 0xff));
  out.push_back(static_cast<char>((u >> 24) & 0xff));
}

float get_f32le(const unsigned char* p) {
  const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                          (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

std::string entry_name(const DumpEntry& e) {
  return "(" + e.sample_id + ", " + to_string(e.segment) + ", layer " +
         std::to_string(e.layer) + ")";
}

std::uint64_t entry_bytes(const DumpEntry& e) {
  return static_cast<std::uint64_t>(e.shape[0]) *
         static_cast<std::uint64_t>(e.shape[1]) * 4u;
}

DumpEntry entry_from_json(const json& j) {
  if (!j.is_object()) throw CorruptionError("manifest entry is not an object");
  DumpEntry e;
  try {
    e.sample_id = j.at("sample_id").get<std::string>();
    e.segment = segment_from_string(j.at("segment").get<std::string>());
    e.layer = j.at("layer").get<int>();
    const auto& shape = j.at("shape");
    if (!shape.is_array() || shape.size() != 2)
      throw CorruptionError("entry " + e.sample_id + ": shape must be [rows, cols]");
    e.shape[0] = shape[0].get<Eigen::Index>();
    e.shape[1] = shape[1].get<Eigen::Index>();
    e.file = j.at("file").get<std::string>();
    e.offset = j.at("offset").get<std::uint64_t>();
  } catch (const json::exception& ex) {
    throw CorruptionError(std::string("malformed manifest entry: ") + ex.what());
  } catch (const DomainError& ex) {
    throw CorruptionError(std::string("malformed manifest entry: ") + ex.what());
  }
  if (e.shape[0] < 0 || e.shape[1] < 0)
    throw CorruptionError("entry " + entry_name(e) + ": negative shape");
  return e;
}

}  // namespace

DumpStore DumpStore::open(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + manifest_path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& ex) {
    throw CorruptionError("manifest " + manifest_path + " is not valid JSON: " + ex.what());
  }
  if (!doc.is_object()) throw CorruptionError("manifest root must be an object");

  DumpStore store;
  store.dir_ = fs::path(manifest_path).parent_path().string();
  auto& m = store.manifest_;
  try {
    m.version = doc.at("version").get<int>();
    m.model = doc.value("model", std::string{});
    m.dataset = doc.value("dataset", std::string{});
    m.dtype = doc.at("dtype").get<std::string>();
    m.layout = doc.at("layout").get<std::string>();
    for (const auto& je : doc.at("entries")) m.entries.push_back(entry_from_json(je));
  } catch (const json::exception& ex) {
    throw CorruptionError(std::string("malformed manifest: ") + ex.what());
  }
  if (m.version != 1)
    throw CorruptionError("unsupported manifest version " + std::to_string(m.version));
  if (m.dtype != "f32le") throw CorruptionError("unsupported dtype: " + m.dtype);
  if (m.layout != "row-major") throw CorruptionError("unsupported layout: " + m.layout);

  // Validate windows up front; tensor reads stay lazy.
  std::map<std::string, std::uint64_t> file_sizes;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    Key key{e.sample_id, static_cast<int>(e.segment), e.layer};
    if (!store.index_.emplace(std::move(key), i).second)
      throw CorruptionError("duplicate entry " + entry_name(e));
    auto it = file_sizes.find(e.file);
    if (it == file_sizes.end()) {
      const fs::path p = fs::path(store.dir_) / e.file;
      std::error_code ec;
      const auto size = fs::file_size(p, ec);
      if (ec)
        throw CorruptionError("entry " + entry_name(e) + ": missing data file " + e.file);
      it = file_sizes.emplace(e.file, static_cast<std::uint64_t>(size)).first;
    }
    if (e.offset + entry_bytes(e) > it->second)
      throw CorruptionError("entry " + entry_name(e) + ": window [" +
                            std::to_string(e.offset) + ", " +
                            std::to_string(e.offset + entry_bytes(e)) +
                            ") overruns " + e.file + " (" +
                            std::to_string(it->second) + " bytes)");
  }
  return store;
}

std::vector<std::string> DumpStore::sample_ids() const {
  std::set<std::string> ids;
  for (const auto& e : manifest_.entries) ids.insert(e.sample_id);
  return {ids.begin(), ids.end()};
}

bool DumpStore::has(const std::string& sample_id, Segment segment, int layer) const {
  return index_.count({sample_id, static_cast<int>(segment), layer}) > 0;
}

Eigen::MatrixXf DumpStore::tensor_f32(const std::string& sample_id, Segment segment,
                                      int layer) const {
  auto it = index_.find({sample_id, static_cast<int>(segment), layer});
  if (it == index_.end())
    throw InputError("no tensor for (" + sample_id + ", " +
                     std::string(to_string(segment)) + ", layer " +
                     std::to_string(layer) + ")");
  const auto& e = manifest_.entries[it->second];
  const fs::path p = fs::path(dir_) / e.file;
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open data file: " + p.string());
  in.seekg(static_cast<std::streamoff>(e.offset));
  std::vector<unsigned char> buf(entry_bytes(e));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != buf.size())
    throw CorruptionError("entry " + entry_name(e) + ": short read from " + e.file);
  Eigen::MatrixXf t(e.shape[0], e.shape[1]);
  const unsigned char* cur = buf.data();
  for (Eigen::Index r = 0; r < e.shape[0]; ++r)
    for (Eigen::Index c = 0; c < e.shape[1]; ++c, cur += 4) t(r, c) = get_f32le(cur);
  return t;
}

Eigen::MatrixXd DumpStore::tensor(const std::string& sample_id, Segment segment,
                                  int layer) const {
  return tensor_f32(sample_id, segment, layer).cast<double>();
}

DumpWriter::DumpWriter(std::string dir, std::string model, std::string dataset,
                       std::string bin_name)
    : dir_(std::move(dir)), bin_name_(std::move(bin_name)) {
  manifest_.model = std::move(model);
  manifest_.dataset = std::move(dataset);
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create dump directory: " + dir_);
  // Truncate up front so repeated writers start clean.
  std::ofstream out(fs::path(dir_) / bin_name_, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open data file for writing: " + bin_name_);
}

void DumpWriter::add(const std::string& sample_id, Segment segment, int layer,
                     const Eigen::MatrixXf& tensor) {
  if (finalized_) throw InputError("DumpWriter::add after finalize");
  if (tensor.size() == 0) throw EmptyInputError("DumpWriter::add: empty tensor");
  DumpEntry e;
  e.sample_id = sample_id;
  e.segment = segment;
  e.layer = layer;
  e.shape = {tensor.rows(), tensor.cols()};
  e.file = bin_name_;
  e.offset = offset_;
  for (const auto& prev : manifest_.entries)
    if (prev.sample_id == e.sample_id && prev.segment == e.segment && prev.layer == e.layer)
      throw InputError("duplicate dump entry " + entry_name(e));

  std::string bytes;
  bytes.reserve(static_cast<std::size_t>(tensor.size()) * 4);
  for (Eigen::Index r = 0; r < tensor.rows(); ++r)
    for (Eigen::Index c = 0; c < tensor.cols(); ++c) put_f32le(tensor(r, c), bytes);

  std::ofstream out(fs::path(dir_) / bin_name_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open data file for writing: " + bin_name_);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + bin_name_);
  offset_ += bytes.size();
  manifest_.entries.push_back(std::move(e));
}

void DumpWriter::add(const std::string& sample_id, Segment segment, int layer,
                     const Eigen::MatrixXd& tensor) {
  add(sample_id, segment, layer, Eigen::MatrixXf(tensor.cast<float>()));
}

std::string DumpWriter::finalize() {
  if (finalized_) throw InputError("DumpWriter::finalize called twice");
  finalized_ = true;
  json doc;
  doc["version"] = manifest_.version;
  doc["model"] = manifest_.model;
  doc["dataset"] = manifest_.dataset;
  doc["dtype"] = manifest_.dtype;
  doc["layout"] = manifest_.layout;
  doc["entries"] = json::array();
  for (const auto& e : manifest_.entries) {
    doc["entries"].push_back({{"sample_id", e.sample_id},
                              {"segment", to_string(e.segment)},
                              {"layer", e.layer},
                              {"shape", {e.shape[0], e.shape[1]}},
                              {"file", e.file},
                              {"offset", e.offset}});
  }
  const fs::path p = fs::path(dir_) / "manifest.json";
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + p.string());
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + p.string());
  return p.string();
}

namespace {

Eigen::VectorXd pooled_vector(const DumpStore& store, const std::string& id,
                              Segment segment, int layer) {
  const Eigen::MatrixXd t = store.tensor(id, segment, layer);
  if (t.rows() == 1) return t.row(0).transpose();
  return t.colwise().mean().transpose();
}

}  // namespace

DistanceMatrix distances(const DumpStore& store, const DistanceSpec& spec) {
  DistanceMatrix out;
  std::vector<std::string> included;
  for (const auto& id : store.sample_ids()) {
    if (store.has(id, spec.a, spec.layer) && store.has(id, spec.b, spec.layer))
      included.push_back(id);
    else
      ++out.skipped;
  }
  if (included.empty())
    throw InputError("distances: no sample has both " +
                     std::string(to_string(spec.a)) + " and " +
                     std::string(to_string(spec.b)) + " at layer " +
                     std::to_string(spec.layer));

  const auto n = static_cast<Eigen::Index>(included.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = included[static_cast<std::size_t>(i)];
    const Eigen::VectorXd va = pooled_vector(store, id, spec.a, spec.layer);
    const Eigen::VectorXd vb = pooled_vector(store, id, spec.b, spec.layer);
    if (va.size() != vb.size())
      throw ShapeError("distances: segment widths differ for sample " + id);
    if (spec.per_dimension) {
      if (i == 0) out.values.resize(n, va.size());
      if (va.size() != out.values.cols())
        throw ShapeError("distances: inconsistent width at sample " + id);
      out.values.row(i) = (va - vb).cwiseAbs().transpose();
    } else {
      if (i == 0) out.values.resize(n, 1);
      out.values(i, 0) = distance(spec.metric, va, vb);
    }
  }
  out.sample_ids = std::move(included);
  return out;
}

}  // namespace iclkit
