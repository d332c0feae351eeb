#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otas::testing {

EigenPairs jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), c = rows.front().size();
  std::vector<double> mean(c, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < c; ++j) mean[j] += r[j] / static_cast<double>(n);
  std::vector<std::vector<double>> cov(c, std::vector<double>(c, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / static_cast<double>(n - 1);
  return cov;
}

std::vector<std::vector<double>> brute_force_pool(const std::vector<std::vector<double>>& cells,
                                                  const std::vector<int>& labels) {
  std::vector<std::vector<double>> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::vector<double> sum(cells[i].size(), 0.0);
    double count = 0.0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (labels[j] != labels[i]) continue;
      for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += cells[j][c];
      count += 1.0;
    }
    for (double& s : sum) s /= count;
    out[i] = sum;
  }
  return out;
}

double brute_force_combined(std::span<const float> feature, const PromptSet& prompts) {
  double total = 0.0;
  for (const auto& t : prompts.positives) {
    double dot = 0.0, nf = 0.0, nt = 0.0;
    for (std::size_t i = 0; i < feature.size(); ++i) {
      dot += static_cast<double>(feature[i]) * t.vector[i];
      nf += static_cast<double>(feature[i]) * feature[i];
      nt += static_cast<double>(t.vector[i]) * t.vector[i];
    }
    total += dot / std::sqrt(nf * nt);
  }
  for (const auto& t : prompts.negatives) {
    double dot = 0.0, nf = 0.0, nt = 0.0;
    for (std::size_t i = 0; i < feature.size(); ++i) {
      dot += static_cast<double>(feature[i]) * t.vector[i];
      nf += static_cast<double>(feature[i]) * feature[i];
      nt += static_cast<double>(t.vector[i]) * t.vector[i];
    }
    total -= dot / std::sqrt(nf * nt);
  }
  return total;
}

Partition best_two_partition(const std::vector<double>& values) {
  const std::size_t n = values.size();
  Partition best{{}, std::numeric_limits<double>::infinity()};
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double sum[2] = {0, 0}, count[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1u;
      sum[g] += values[i];
      count[g] += 1;
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1u;
      const double m = sum[g] / count[g];
      cost += (values[i] - m) * (values[i] - m);
    }
    if (cost < best.cost) {
      best.cost = cost;
      best.labels.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) best.labels[i] = static_cast<int>((mask >> i) & 1u);
    }
  }
  return best;
}

std::map<std::array<long long, 3>, BruteVoxel> brute_force_voxelize(const SemanticCloud& cloud, double v) {
  std::map<std::array<long long, 3>, BruteVoxel> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::array<long long, 3> key{};
    for (int a = 0; a < 3; ++a) {
      // Truncation toward zero, corrected for negative non-integral quotients.
      const double q = cloud.points[i][a] / v;
      long long t = static_cast<long long>(q);
      if (q < 0.0 && static_cast<double>(t) != q) t -= 1;
      key[static_cast<std::size_t>(a)] = t;
    }
    BruteVoxel& bv = out[key];
    if (bv.feature_sum.empty()) bv.feature_sum.assign(cloud.channels, 0.0);
    for (std::size_t c = 0; c < cloud.channels; ++c) bv.feature_sum[c] += cloud.features[i * cloud.channels + c];
    for (int a = 0; a < 3; ++a) bv.position_sum[static_cast<std::size_t>(a)] += cloud.points[i][a];
    ++bv.count;
  }
  return out;
}

std::vector<int> brute_force_knn(std::span<const LabeledPoint> labeled, std::span<const Eigen::Vector3d> targets,
                                 std::size_t k) {
  std::vector<int> out;
  for (const auto& t : targets) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      const double dx = labeled[i].position.x() - t.x();
      const double dy = labeled[i].position.y() - t.y();
      const double dz = labeled[i].position.z() - t.z();
      all.emplace_back(dx * dx + dy * dy + dz * dz, i);
    }
    std::sort(all.begin(), all.end());
    std::map<int, int> votes;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ++votes[labeled[all[i].second].label];
    int best = 0, best_count = -1;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace otas::testing
