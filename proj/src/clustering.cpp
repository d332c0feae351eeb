#include "otas/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "otas/error.hpp"

namespace otas {
namespace {

struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

Dataset to_dataset(const TokenMatrix& m) {
  Dataset ds{m.rows, m.cols, std::vector<double>(m.data.begin(), m.data.end())};
  for (double v : ds.values) {
    if (!std::isfinite(v)) throw ValidationError("k-Means input contains non-finite values");
  }
  return ds;
}

std::size_t count_distinct_rows(const TokenMatrix& m) {
  std::vector<std::size_t> order(m.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    auto ra = m.row(a);
    auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = m.rows > 0 ? 1 : 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

double squared_distance(const double* a, const Eigen::MatrixXd& centroids, Eigen::Index c) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
    const double diff = a[j] - centroids(c, j);
    acc += diff * diff;
  }
  return acc;
}

// Uniform double in [0, 1) built from raw engine bits so results do not depend on
// the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd seed_plus_plus(const Dataset& ds, std::size_t k, std::mt19937_64& rng) {
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(ds.dim));
  auto set_centroid = [&](std::size_t c, std::size_t point) {
    for (std::size_t j = 0; j < ds.dim; ++j) {
      centroids(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = ds.row(point)[j];
    }
  };

  std::size_t first = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(ds.n));
  first = std::min(first, ds.n - 1);
  set_centroid(0, first);

  std::vector<double> nearest(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) nearest[i] = squared_distance(ds.row(i), centroids, 0);

  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    const double target = uniform01(rng) * total;
    std::size_t pick = ds.n;
    std::size_t last_positive = ds.n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < ds.n; ++i) {
      if (nearest[i] <= 0.0) continue;
      last_positive = i;
      cumulative += nearest[i];
      if (cumulative > target) {
        pick = i;
        break;
      }
    }
    if (pick == ds.n) pick = last_positive;
    set_centroid(c, pick);
    for (std::size_t i = 0; i < ds.n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(ds.row(i), centroids, static_cast<Eigen::Index>(c)));
    }
  }
  return centroids;
}

struct Assignment {
  std::vector<int> labels;
  std::vector<double> distances;  // squared
  double inertia = 0.0;
};

Assignment assign(const Dataset& ds, const Eigen::MatrixXd& centroids) {
  Assignment a;
  a.labels.resize(ds.n);
  a.distances.resize(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double dist = squared_distance(ds.row(i), centroids, c);
      if (dist < best) {
        best = dist;
        best_c = static_cast<int>(c);
      }
    }
    a.labels[i] = best_c;
    a.distances[i] = best;
  }
  a.inertia = std::accumulate(a.distances.begin(), a.distances.end(), 0.0);
  return a;
}

// Moves the farthest point into each empty cluster. Returns true if any cluster was empty.
bool reseed_empty(Assignment& a, std::size_t k) {
  std::vector<std::size_t> counts(k, 0);
  for (int label : a.labels) ++counts[static_cast<std::size_t>(label)];
  bool any = false;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    std::size_t far = a.labels.size();
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      if (counts[static_cast<std::size_t>(a.labels[i])] < 2) continue;
      if (far == a.labels.size() || a.distances[i] > a.distances[far]) far = i;
    }
    if (far == a.labels.size()) break;
    --counts[static_cast<std::size_t>(a.labels[far])];
    a.labels[far] = static_cast<int>(c);
    a.distances[far] = 0.0;
    counts[c] = 1;
    any = true;
  }
  if (any) a.inertia = std::accumulate(a.distances.begin(), a.distances.end(), 0.0);
  return any;
}

Eigen::MatrixXd cluster_means(const Dataset& ds, const std::vector<int>& labels, const Eigen::MatrixXd& previous) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(previous.rows(), previous.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(previous.rows()), 0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    const auto c = static_cast<Eigen::Index>(labels[i]);
    ++counts[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < ds.dim; ++j) sums(c, static_cast<Eigen::Index>(j)) += ds.row(i)[j];
  }
  for (Eigen::Index c = 0; c < previous.rows(); ++c) {
    const std::size_t count = counts[static_cast<std::size_t>(c)];
    if (count == 0) {
      sums.row(c) = previous.row(c);
    } else {
      sums.row(c) /= static_cast<double>(count);
    }
  }
  return sums;
}

}  // namespace

ClusterModel kmeans_fit(const TokenMatrix& data, const KMeansOptions& options) {
  const std::size_t k = options.k;
  if (k < 1) throw ValidationError("k-Means needs k >= 1");
  if (data.rows < k) {
    throw ValidationError("k-Means with k=" + std::to_string(k) + " on only " + std::to_string(data.rows) + " rows");
  }
  const Dataset ds = to_dataset(data);
  const std::size_t distinct = count_distinct_rows(data);
  if (distinct < k) {
    throw ValidationError("k-Means with k=" + std::to_string(k) + " but only " + std::to_string(distinct) +
                          " distinct points");
  }

  std::mt19937_64 rng(options.seed);
  ClusterModel model;
  model.k = k;
  model.centroids = seed_plus_plus(ds, k, rng);

  // Enough slack for empty-cluster repairs once the iteration budget is spent.
  const std::size_t hard_cap = options.max_iters + 4 * k + 4;
  bool converged = false;
  Assignment current;
  for (std::size_t iter = 0;; ++iter) {
    current = assign(ds, model.centroids);
    const bool had_empty = iter < hard_cap && reseed_empty(current, k);
    model.inertia_history.push_back(current.inertia);
    if (!had_empty && (converged || iter >= options.max_iters)) break;
    if (iter >= hard_cap) break;

    Eigen::MatrixXd next = cluster_means(ds, current.labels, model.centroids);
    const double shift = (next - model.centroids).rowwise().norm().maxCoeff();
    model.centroids = std::move(next);
    ++model.iterations;
    converged = shift < options.tol;
  }
  model.assignments = std::move(current.labels);
  model.inertia = current.inertia;
  return model;
}

std::vector<int> kmeans_predict(const ClusterModel& model, const TokenMatrix& data) {
  if (data.cols != static_cast<std::size_t>(model.centroids.cols())) {
    throw ValidationError("k-Means prediction input width does not match centroids");
  }
  return assign(to_dataset(data), model.centroids).labels;
}

std::size_t MaskSet::mask_of(std::size_t view, std::size_t cell) const {
  for (std::size_t m = 0; m < k; ++m) {
    if (contains(m, view, cell)) return m;
  }
  throw IntegrityError("cell " + std::to_string(cell) + " of view " + std::to_string(view) + " lies in no mask");
}

std::vector<std::size_t> MaskSet::labels(std::size_t view) const {
  const std::size_t cells = cells_per_view();
  std::vector<std::size_t> out(cells, k);
  for (std::size_t m = 0; m < k; ++m) {
    const std::uint8_t* base = bits.data() + (m * n_views + view) * cells;
    for (std::size_t c = 0; c < cells; ++c) {
      if (base[c]) out[c] = m;
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (out[c] == k) throw IntegrityError("cell " + std::to_string(c) + " lies in no mask");
  }
  return out;
}

MaskSet labels_to_masks(std::span<const int> labels, std::size_t k, std::size_t n_views, std::size_t d) {
  const std::size_t cells = n_views * d * d;
  if (labels.size() != cells) {
    throw ValidationError("label vector has length " + std::to_string(labels.size()) + ", expected " +
                          std::to_string(cells));
  }
  MaskSet masks;
  masks.k = k;
  masks.n_views = n_views;
  masks.d = d;
  masks.bits.assign(k * cells, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ValidationError("label " + std::to_string(label) + " outside [0, " + std::to_string(k) + ")");
    }
    masks.bits[static_cast<std::size_t>(label) * cells + i] = 1;
  }
  return masks;
}

MaskSet assignments_to_masks(const ClusterModel& model, std::size_t n_views, std::size_t d) {
  return labels_to_masks(model.assignments, model.k, n_views, d);
}

}  // namespace otas
