#include "mathenc/pca.hpp"

#include "mathenc/error.hpp"

#include <algorithm>

namespace mathenc {

PcaModel fit_pca(const Eigen::Ref<const Matrix>& x, Eigen::Index target_dims) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (target_dims < 1 || target_dims > std::min(n, d))
    throw Error(ErrorCode::invalid_argument,
                "target_dims " + std::to_string(target_dims) + " outside [1, min(n_samples, n_features)]");

  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Matrix centred = x.rowwise() - model.mean.transpose();
  if (centred.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorCode::degenerate_input, "every feature has zero variance");

  Eigen::BDCSVD<Matrix> svd(centred, Eigen::ComputeThinV);
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Vector variances = svd.singularValues().array().square() / denom;
  const double total = variances.sum();

  model.components = svd.matrixV().leftCols(target_dims);
  model.explained_variance = variances.head(target_dims);
  model.explained_variance_ratio = model.explained_variance / total;
  for (Eigen::Index c = 0; c < target_dims; ++c) {
    Eigen::Index arg = 0;
    model.components.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.components(arg, c) < 0) model.components.col(c) *= -1.0;
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != model.mean.size())
    throw Error(ErrorCode::dimension_mismatch, "PCA input has " + std::to_string(x.cols()) +
                                                   " features, model expects " +
                                                   std::to_string(model.mean.size()));
  return (x.rowwise() - model.mean.transpose()) * model.components;
}

EncodedMatrix pca_reduce(const EncodedMatrix& m, Eigen::Index target_dims) {
  const PcaModel model = fit_pca(m.features, target_dims);
  EncodedMatrix out;
  out.spec = m.spec;
  out.sample_ids = m.sample_ids;
  out.features = pca_transform(model, m.features);
  return out;
}

Eigen::Index default_pca_dims(Eigen::Index n_samples, Eigen::Index n_features) {
  return std::max<Eigen::Index>(1, std::min({Eigen::Index{50}, n_samples - 1, n_features}));
}

}  // namespace mathenc
