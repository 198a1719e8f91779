#pragma once

#include <cstdint>
#include <string>

#include "iclkit/attention.hpp"
#include "iclkit/client.hpp"
#include "iclkit/distance.hpp"
#include "iclkit/errors.hpp"

namespace iclkit {

// Everything a command run needs, assembled from flags and the optional
// key=value config file; flags win. The API key itself never appears here —
// only the name of the environment variable that holds it.
struct ExperimentConfig {
  std::uint64_t seed = 1987;
  Distance distance_metric = Distance::cosine;
  Kernel kernel = Kernel::identity;
  int bootstrap_n = 1000;
  double holdout_fraction = 0.2;
  ClientConfig client;
  std::string dataset_path;
  std::string dump_path;
  std::string report_dir;

  void validate() const {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
      throw ConfigError("holdout_fraction must lie in (0, 1)");
    if (bootstrap_n <= 0) throw ConfigError("bootstrap_n must be positive");
    client.validate();
  }
};

}  // namespace iclkit
