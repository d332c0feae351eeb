#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "otas/tensor.hpp"

namespace otas {

/// Principal-component projection used as the latent variable model before clustering.
/// Projection only; no whitening.
struct PcaModel {
  Eigen::VectorXd mean;                // length C
  Eigen::MatrixXd components;          // C_r x C, rows are orthonormal principal axes
  Eigen::VectorXd explained_variance;  // length C_r, non-increasing, sample variance (n - 1)

  std::size_t input_dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(components.rows()); }
};

/// Fits the top `c_r` principal axes of the centered tokens.
///
/// Components come out in descending variance order. Each axis is signed so that its
/// largest-magnitude entry is positive (first such entry on ties), which makes fits
/// reproducible and independent of row order. Requires rows >= 2 and
/// 1 <= c_r <= min(rows - 1, cols); zero-variance data yields valid axes with zero variance.
PcaModel pca_fit(const TokenMatrix& tokens, std::size_t c_r);

/// Row i of the result is components * (row_i - mean).
TokenMatrix pca_transform(const PcaModel& model, const TokenMatrix& tokens);

/// Maps reduced rows back into the input space: mean + components^T * row.
TokenMatrix pca_inverse_transform(const PcaModel& model, const TokenMatrix& reduced);

}  // namespace otas
