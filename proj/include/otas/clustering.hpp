#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "otas/tensor.hpp"

namespace otas {

struct KMeansOptions {
  std::size_t k = 4;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-4;  // stop once no centroid moves farther than this
};

/// Result of a k-Means fit; assignments index rows of the clustered matrix.
struct ClusterModel {
  std::size_t k = 0;
  Eigen::MatrixXd centroids;     // k x dims
  std::vector<int> assignments;  // values in [0, k)
  double inertia = 0.0;          // sum of squared distances to the assigned centroid
  std::vector<double> inertia_history;  // inertia after every assignment step
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// Equidistant points go to the lowest centroid index. A cluster that ends up
/// empty is re-seeded with the point farthest from its current centroid. The
/// returned assignments always correspond to the returned centroids. Throws
/// ValidationError if the data has fewer than k distinct rows.
ClusterModel kmeans_fit(const TokenMatrix& data, const KMeansOptions& options);

/// Nearest-centroid labels for arbitrary rows (ties to the lowest index).
std::vector<int> kmeans_predict(const ClusterModel& model, const TokenMatrix& data);

/// k binary masks over n views of d x d cells; every (view, cell) lies in exactly one mask.
struct MaskSet {
  std::size_t k = 0;
  std::size_t n_views = 0;
  std::size_t d = 0;
  std::vector<std::uint8_t> bits;  // [mask][view][cell]

  std::size_t cells_per_view() const { return d * d; }
  bool contains(std::size_t mask, std::size_t view, std::size_t cell) const {
    return bits[(mask * n_views + view) * d * d + cell] != 0;
  }
  /// Index of the mask holding (view, cell).
  std::size_t mask_of(std::size_t view, std::size_t cell) const;
  /// Per-cell mask index for one view.
  std::vector<std::size_t> labels(std::size_t view) const;
};

MaskSet assignments_to_masks(const ClusterModel& model, std::size_t n_views, std::size_t d);
/// Builds masks from a raw label vector of length n_views * d * d.
MaskSet labels_to_masks(std::span<const int> labels, std::size_t k, std::size_t n_views, std::size_t d);

}  // namespace otas
