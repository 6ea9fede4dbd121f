#pragma once

#include "mathenc/encode.hpp"
#include "mathenc/linalg.hpp"

namespace mathenc {

struct PcaModel {
  Vector mean;
  /// One principal axis per column, in descending variance order.
  Matrix components;
  Vector explained_variance;
  Vector explained_variance_ratio;
};

/// Thin SVD of the centred data. Each axis is signed so that its
/// largest-magnitude loading is positive.
PcaModel fit_pca(const Eigen::Ref<const Matrix>& x, Eigen::Index target_dims);

Matrix pca_transform(const PcaModel& model, const Eigen::Ref<const Matrix>& x);

EncodedMatrix pca_reduce(const EncodedMatrix& m, Eigen::Index target_dims);

/// min(50, n_samples - 1, n_features), at least 1.
Eigen::Index default_pca_dims(Eigen::Index n_samples, Eigen::Index n_features);

}  // namespace mathenc
