#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string_view>

#include "iclkit/errors.hpp"

namespace iclkit {

enum class Distance { squared_euclidean, euclidean, cosine };

inline const char* to_string(Distance d) {
  switch (d) {
    case Distance::squared_euclidean: return "squared_euclidean";
    case Distance::euclidean: return "euclidean";
    case Distance::cosine: return "cosine";
  }
  return "unknown";
}

inline Distance distance_from_string(std::string_view s) {
  if (s == "squared_euclidean") return Distance::squared_euclidean;
  if (s == "euclidean") return Distance::euclidean;
  if (s == "cosine") return Distance::cosine;
  throw DomainError("unknown distance metric: " + std::string(s));
}

inline double squared_euclidean_distance(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("distance: vector lengths differ");
  return (a - b).squaredNorm();
}

inline double euclidean_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("distance: vector lengths differ");
  return (a - b).norm();
}

// 1 - cosine similarity. A zero vector is treated as orthogonal to everything
// (similarity 0, distance 1). The similarity is clamped to [-1, 1] so roundoff
// cannot push the distance outside [0, 2].
inline double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw ShapeError("distance: vector lengths differ");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  const double sim = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return 1.0 - sim;
}

inline double distance(Distance metric, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b) {
  switch (metric) {
    case Distance::squared_euclidean:
      return squared_euclidean_distance(a, b);
    case Distance::euclidean:
      return euclidean_distance(a, b);
    case Distance::cosine:
      return cosine_distance(a, b);
  }
  throw DomainError("distance: unknown metric");
}

}  // namespace iclkit
