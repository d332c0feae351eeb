#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "otas/refinement.hpp"

namespace otas {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

/// All values in [0, 1]; a 0/0 ratio is reported as 0.
struct Metrics {
  double iou = 0.0;
  double fsc = 0.0;
  double pre = 0.0;
  double rec = 0.0;
};

/// Binary confusion counts; nonzero entries are positive.
Confusion confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);
Confusion confusion(const BinaryMask& pred, const BinaryMask& gt);

Metrics metrics(const Confusion& c);

struct LabeledPoint {
  Eigen::Vector3d position;
  int label = 0;
};

/// Majority label among the k nearest labeled points (Euclidean) of every target.
///
/// Neighbours at equal distance are ranked by their index in `labeled`; vote ties
/// go to the smallest label. Uses a k-d tree but returns exactly what an
/// all-pairs scan with the same tie rules would.
std::vector<int> project_labels_knn(std::span<const LabeledPoint> labeled,
                                    std::span<const Eigen::Vector3d> targets, std::size_t k = 5);

/// Adjusted Rand index between two labelings of the same items (1.0 for identical partitions).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace otas
