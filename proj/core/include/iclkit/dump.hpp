#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "iclkit/attention.hpp"
#include "iclkit/distance.hpp"
#include "iclkit/errors.hpp"

namespace iclkit {

struct DumpEntry {
  std::string sample_id;
  Segment segment = Segment::query;
  int layer = 0;
  std::array<Eigen::Index, 2> shape{0, 0};  // rows, cols
  std::string file;                         // relative to the manifest directory
  std::uint64_t offset = 0;                 // byte offset into file
};

struct DumpManifest {
  int version = 1;
  std::string model;
  std::string dataset;
  std::string dtype = "f32le";
  std::string layout = "row-major";
  std::vector<DumpEntry> entries;
};

// Read-side view over manifest.json + raw float32 bins. Open validates the
// manifest (version, dtype, window bounds, key uniqueness); tensor reads are
// lazy and bit-exact.
class DumpStore {
 public:
  static DumpStore open(const std::string& manifest_path);

  const DumpManifest& manifest() const { return manifest_; }
  std::vector<std::string> sample_ids() const;  // sorted, unique
  bool has(const std::string& sample_id, Segment segment, int layer) const;
  Eigen::MatrixXf tensor_f32(const std::string& sample_id, Segment segment, int layer) const;
  Eigen::MatrixXd tensor(const std::string& sample_id, Segment segment, int layer) const;

 private:
  using Key = std::tuple<std::string, int, int>;  // sample, segment, layer
  DumpManifest manifest_;
  std::string dir_;
  std::map<Key, std::size_t> index_;
};

// Write side: tensors append to one bin file, finalize() emits the manifest.
class DumpWriter {
 public:
  DumpWriter(std::string dir, std::string model, std::string dataset,
             std::string bin_name = "activations.bin");

  void add(const std::string& sample_id, Segment segment, int layer,
           const Eigen::MatrixXf& tensor);
  void add(const std::string& sample_id, Segment segment, int layer,
           const Eigen::MatrixXd& tensor);
  // Writes manifest.json; returns its path.
  std::string finalize();

 private:
  std::string dir_;
  std::string bin_name_;
  DumpManifest manifest_;
  std::uint64_t offset_ = 0;
  bool finalized_ = false;
};

struct DistanceSpec {
  Segment a = Segment::query;
  Segment b = Segment::answer;
  int layer = 0;
  Distance metric = Distance::cosine;
  bool per_dimension = false;  // |a - b| elementwise instead of a scalar
};

struct DistanceMatrix {
  std::vector<std::string> sample_ids;  // sorted; rows of `values`
  Eigen::MatrixXd values;               // n x 1, or n x d in per-dimension mode
  int skipped = 0;                      // samples lacking one of the segments
};

// Per-sample distances between two segments. Multi-row tensors are
// mean-pooled over rows first.
DistanceMatrix distances(const DumpStore& store, const DistanceSpec& spec);

}  // namespace iclkit
