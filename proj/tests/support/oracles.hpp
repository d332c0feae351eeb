#pragma once

// Brute-force reference implementations used only by the tests. They are written
// independently of the library code paths they check.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "otas/alignment.hpp"
#include "otas/evaluation.hpp"
#include "otas/fusion.hpp"

namespace otas::testing {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix, eigenvalues descending.
struct EigenPairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};
EigenPairs jacobi_eigen(std::vector<std::vector<double>> a);

/// Sample covariance (n - 1) of row-major data.
std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& rows);

/// Per-cell mean over cells sharing a label, computed with a plain double loop per label.
std::vector<std::vector<double>> brute_force_pool(const std::vector<std::vector<double>>& cells,
                                                  const std::vector<int>& labels);

/// sum_pos <f,t> - sum_neg <f,t>, evaluated with explicit loops.
double brute_force_combined(std::span<const float> feature, const PromptSet& prompts);

/// Best 2-partition of scalar values by exhaustive enumeration of all labelings.
struct Partition {
  std::vector<int> labels;
  double cost;
};
Partition best_two_partition(const std::vector<double>& values);

struct BruteVoxel {
  std::vector<double> feature_sum;
  std::array<double, 3> position_sum{};
  std::size_t count = 0;
};
/// Groups by floor(p / v) using its own index computation.
std::map<std::array<long long, 3>, BruteVoxel> brute_force_voxelize(const SemanticCloud& cloud, double v);

/// All-pairs k-NN majority vote with the documented tie rules.
std::vector<int> brute_force_knn(std::span<const LabeledPoint> labeled, std::span<const Eigen::Vector3d> targets,
                                 std::size_t k);

}  // namespace otas::testing
