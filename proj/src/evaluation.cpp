#include "otas/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>

#include "otas/error.hpp"

namespace otas {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct Neighbor {
  double dist2;
  std::size_t index;
  bool operator<(const Neighbor& o) const { return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index; }
};

class KdTree {
 public:
  explicit KdTree(std::span<const LabeledPoint> points) : points_(points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points.size() / kLeafSize + 2);
    root_ = build(0, order_.size());
  }

  // The k best neighbours, best first.
  std::vector<Neighbor> nearest(const Eigen::Vector3d& q, std::size_t k) const {
    std::vector<Neighbor> heap;  // max-heap on (dist2, index)
    heap.reserve(k + 1);
    search(root_, q, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

 private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin, end;  // range in order_
    int axis = -1;           // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(points_[order_[i]].position);
      hi = hi.cwiseMax(points_[order_[i]].position);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                       const double pa = points_[a].position[axis];
                       const double pb = points_[b].position[axis];
                       return pa != pb ? pa < pb : a < b;
                     });
    const double split = points_[order_[mid]].position[axis];
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void offer(std::vector<Neighbor>& heap, std::size_t k, Neighbor n) const {
    if (heap.size() < k) {
      heap.push_back(n);
      std::push_heap(heap.begin(), heap.end());
    } else if (n < heap.front()) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = n;
      std::push_heap(heap.begin(), heap.end());
    }
  }

  void search(std::size_t id, const Eigen::Vector3d& q, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t p = order_[i];
        offer(heap, k, Neighbor{(points_[p].position - q).squaredNorm(), p});
      }
      return;
    }
    const double diff = q[node.axis] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    // Equal distances must still be visited: a lower index wins the tie.
    if (heap.size() < k || diff * diff <= heap.front().dist2) search(far, q, k, heap);
  }

  std::span<const LabeledPoint> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

double pairs(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

Confusion confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) {
    throw ValidationError("prediction has " + std::to_string(pred.size()) + " elements, ground truth " +
                          std::to_string(gt.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Confusion confusion(const BinaryMask& pred, const BinaryMask& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw ValidationError("mask shapes differ: " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                          " vs " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  return confusion(std::span<const std::uint8_t>(pred.data), std::span<const std::uint8_t>(gt.data));
}

Metrics metrics(const Confusion& c) {
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  Metrics m;
  m.iou = ratio(tp, tp + fp + fn);
  m.pre = ratio(tp, tp + fp);
  m.rec = ratio(tp, tp + fn);
  m.fsc = ratio(2.0 * m.pre * m.rec, m.pre + m.rec);
  return m;
}

std::vector<int> project_labels_knn(std::span<const LabeledPoint> labeled, std::span<const Eigen::Vector3d> targets,
                                    std::size_t k) {
  if (k < 1) throw ValidationError("k-NN label projection needs k >= 1");
  if (labeled.empty()) throw ValidationError("k-NN label projection needs labeled points");
  const KdTree tree(labeled);
  const std::size_t kk = std::min(k, labeled.size());
  std::vector<int> out(targets.size());
  std::map<int, std::size_t> votes;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    votes.clear();
    for (const Neighbor& n : tree.nearest(targets[t], kk)) ++votes[labeled[n.index].label];
    int best = votes.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [label, count] : votes) {  // ascending label order, so ties keep the smaller id
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    out[t] = best;
  }
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("labelings differ in length");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : joint) index += pairs(count);
  for (const auto& [key, count] : rows) sum_rows += pairs(count);
  for (const auto& [key, count] : cols) sum_cols += pairs(count);
  const double total = pairs(n);
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

}  // namespace otas
