#include "otas/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "otas/error.hpp"

namespace otas {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// LU factorization of (T - shift I) for a symmetric tridiagonal T, with partial
// pivoting (same scheme as LAPACK dgttrf). Zero pivots are replaced by `tiny` so
// that the solve stays defined when the shift hits an eigenvalue exactly.
class ShiftedTridiagonalLu {
 public:
  ShiftedTridiagonalLu(const VectorXd& diag, const VectorXd& sub, double shift, double tiny)
      : n_(diag.size()), dl_(sub), d_(diag.array() - shift), du_(sub),
        du2_(std::max<Eigen::Index>(n_ - 2, 0)), pivot_(static_cast<std::size_t>(n_), false) {
    du2_.setZero();
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] == 0.0) d_[i] = tiny;
        const double fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double tmp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = tmp - fact * d_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        pivot_[static_cast<std::size_t>(i)] = true;
      }
    }
    if (n_ > 0 && d_[n_ - 1] == 0.0) d_[n_ - 1] = tiny;
  }

  VectorXd solve(VectorXd b) const {
    for (Eigen::Index i = 0; i + 1 < n_; ++i) {
      if (pivot_[static_cast<std::size_t>(i)]) std::swap(b[i], b[i + 1]);
      b[i + 1] -= dl_[i] * b[i];
    }
    VectorXd x(n_);
    for (Eigen::Index i = n_ - 1; i >= 0; --i) {
      double acc = b[i];
      if (i + 1 < n_) acc -= du_[i] * x[i + 1];
      if (i + 2 < n_) acc -= du2_[i] * x[i + 2];
      x[i] = acc / d_[i];
    }
    return x;
  }

 private:
  Eigen::Index n_;
  VectorXd dl_, d_, du_, du2_;
  std::vector<bool> pivot_;
};

// Deterministic, generic starting vector for inverse iteration.
VectorXd start_vector(Eigen::Index n, std::size_t salt) {
  VectorXd v(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull ^ (salt * 0xBF58476D1CE4E5B9ull);
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  return v;
}

bool orthonormalize(VectorXd& v, const std::vector<VectorXd>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const VectorXd& b : basis) v -= b.dot(v) * b;
  }
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  v /= norm;
  return true;
}

// Eigenvectors of the tridiagonal matrix for the given eigenvalues by inverse
// iteration, orthogonalized against the vectors already found.
std::vector<VectorXd> tridiagonal_eigenvectors(const VectorXd& diag, const VectorXd& sub,
                                               const std::vector<double>& eigenvalues) {
  const Eigen::Index n = diag.size();
  double scale = diag.cwiseAbs().maxCoeff();
  if (sub.size() > 0) scale = std::max(scale, 2.0 * sub.cwiseAbs().maxCoeff());
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = scale > 0.0 ? eps * scale : 1.0;

  std::vector<VectorXd> vectors;
  vectors.reserve(eigenvalues.size());
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    const ShiftedTridiagonalLu lu(diag, sub, eigenvalues[j], tiny);
    VectorXd v = start_vector(n, j);
    orthonormalize(v, vectors);
    for (int iter = 0; iter < 6; ++iter) {
      VectorXd next = lu.solve(v);
      if (!orthonormalize(next, vectors)) break;
      v = std::move(next);
    }
    if (!orthonormalize(v, vectors)) {
      // Start vector fell into the span of earlier vectors; fall back to unit axes.
      for (Eigen::Index axis = 0; axis < n; ++axis) {
        v = VectorXd::Unit(n, axis);
        if (orthonormalize(v, vectors)) break;
      }
    }
    vectors.push_back(std::move(v));
  }
  return vectors;
}

void fix_sign(MatrixXd& rows, Eigen::Index r) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < rows.cols(); ++i) {
    if (std::abs(rows(r, i)) > std::abs(rows(r, best))) best = i;
  }
  if (rows(r, best) < 0.0) rows.row(r) *= -1.0;
}

}  // namespace

PcaModel pca_fit(const TokenMatrix& tokens, std::size_t c_r) {
  const std::size_t n = tokens.rows;
  const std::size_t c = tokens.cols;
  if (n < 2) throw ValidationError("PCA needs at least 2 rows, got " + std::to_string(n));
  if (c_r < 1 || c_r > std::min(n - 1, c)) {
    throw ValidationError("PCA output dimension " + std::to_string(c_r) + " outside [1, " +
                          std::to_string(std::min(n - 1, c)) + "]");
  }
  for (float v : tokens.data) {
    if (!std::isfinite(v)) throw ValidationError("PCA input contains non-finite values");
  }

  // Canonical row order makes the accumulated sums independent of input order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = tokens.row(a);
    auto rb = tokens.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });

  MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < n; ++i) {
    auto row = tokens.row(order[i]);
    for (std::size_t j = 0; j < c; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  x.rowwise() -= model.mean.transpose();

  MatrixXd cov = MatrixXd::Zero(x.cols(), x.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(n - 1));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();

  // Only the leading axes are needed: tridiagonalize, take all eigenvalues, then
  // recover the c_r leading eigenvectors by inverse iteration.
  Eigen::Tridiagonalization<MatrixXd> tri(cov);
  const VectorXd diag = tri.diagonal();
  const VectorXd sub = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const VectorXd& ascending = solver.eigenvalues();

  std::vector<double> leading(c_r);
  for (std::size_t j = 0; j < c_r; ++j) leading[j] = ascending[static_cast<Eigen::Index>(c - 1 - j)];

  const std::vector<VectorXd> tri_vectors = tridiagonal_eigenvectors(diag, sub, leading);
  MatrixXd z(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c_r));
  for (std::size_t j = 0; j < c_r; ++j) z.col(static_cast<Eigen::Index>(j)) = tri_vectors[j];
  const MatrixXd axes = tri.matrixQ() * z;

  model.components = axes.transpose();
  model.explained_variance.resize(static_cast<Eigen::Index>(c_r));
  for (std::size_t j = 0; j < c_r; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    fix_sign(model.components, r);
    model.explained_variance[r] = std::max(leading[j], 0.0);
  }
  return model;
}

TokenMatrix pca_transform(const PcaModel& model, const TokenMatrix& tokens) {
  const std::size_t c = model.input_dim();
  if (tokens.cols != c) {
    throw ValidationError("PCA input has " + std::to_string(tokens.cols) + " columns, model expects " +
                          std::to_string(c));
  }
  const std::size_t c_r = model.output_dim();
  TokenMatrix out(tokens.rows, c_r);
  out.views = tokens.views;
  VectorXd centered(static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < tokens.rows; ++i) {
    auto row = tokens.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      centered[static_cast<Eigen::Index>(j)] = row[j] - model.mean[static_cast<Eigen::Index>(j)];
    }
    const VectorXd projected = model.components * centered;
    auto dst = out.row(i);
    for (std::size_t j = 0; j < c_r; ++j) dst[j] = static_cast<float>(projected[static_cast<Eigen::Index>(j)]);
  }
  return out;
}

TokenMatrix pca_inverse_transform(const PcaModel& model, const TokenMatrix& reduced) {
  const std::size_t c_r = model.output_dim();
  if (reduced.cols != c_r) throw ValidationError("reduced matrix width does not match PCA model");
  const std::size_t c = model.input_dim();
  TokenMatrix out(reduced.rows, c);
  out.views = reduced.views;
  VectorXd code(static_cast<Eigen::Index>(c_r));
  for (std::size_t i = 0; i < reduced.rows; ++i) {
    auto row = reduced.row(i);
    for (std::size_t j = 0; j < c_r; ++j) code[static_cast<Eigen::Index>(j)] = row[j];
    const VectorXd back = model.mean + model.components.transpose() * code;
    auto dst = out.row(i);
    for (std::size_t j = 0; j < c; ++j) dst[j] = static_cast<float>(back[static_cast<Eigen::Index>(j)]);
  }
  return out;
}

}  // namespace otas
