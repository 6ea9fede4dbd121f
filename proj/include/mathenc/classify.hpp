#pragma once

#include "mathenc/encode.hpp"
#include "mathenc/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mathenc {

enum class ClassifierAlgo { logreg, linear_svc, knn, mlp, dectree, randforest };

std::string_view to_string(ClassifierAlgo algo);
ClassifierAlgo parse_classifier_algo(std::string_view name);
/// Column heading used in reports, e.g. "LogReg".
std::string_view display_name(ClassifierAlgo algo);

struct LogregParams {
  double C = 1.0;
  int max_epochs = 1000;
  double tol = 1e-4;
};

struct SvcParams {
  double C = 1.0;
  int max_epochs = 1000;
};

struct KnnParams {
  int k = 5;
};

struct MlpParams {
  int hidden = 500;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 200;
  double tol = 1e-5;
  int patience = 10;
  double l2 = 0.0;
};

struct TreeParams {
  /// 0 means unlimited.
  int max_depth = 0;
  int min_samples_split = 2;
};

struct ForestParams {
  int n_trees = 100;
  bool bootstrap = true;
  /// Features tried per split; 0 means round(sqrt(d)), negative means all.
  int max_features = 0;
  TreeParams tree;
};

struct ClassifierSpec {
  ClassifierAlgo algo = ClassifierAlgo::logreg;
  LogregParams logreg;
  SvcParams svc;
  KnnParams knn;
  MlpParams mlp;
  TreeParams tree;
  ForestParams forest;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Binary one-vs-rest problem: value and gradient of
/// 0.5 |w|^2 + C sum_i log(1 + exp(-s_i (w.x_i + b))), s_i in {-1, +1}.
/// `wb` holds w followed by the intercept b (not regularised).
double logreg_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& s,
                        double C, const Eigen::Ref<const Vector>& wb, Vector* gradient);

/// 0.5 |w|^2 + C sum_i max(0, 1 - s_i (w.x_i + b)).
double svc_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& s, double C,
                     const Eigen::Ref<const Vector>& wb);

struct MlpWeights {
  Matrix w1;  // d x h
  Vector b1;
  Matrix w2;  // h x L
  Vector b2;

  Eigen::Index size() const { return w1.size() + b1.size() + w2.size() + b2.size(); }
  Vector flatten() const;
  void assign(const Eigen::Ref<const Vector>& flat);
};

/// Mean cross-entropy of the softmax output plus l2 / (2n) |W|^2; fills
/// `gradient` (same shapes) when given.
double mlp_loss(const MlpWeights& weights, const Eigen::Ref<const Matrix>& x,
                const std::vector<int>& y, double l2, MlpWeights* gradient);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Class fractions of the training samples reaching this node.
  Vector distribution;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  const Vector& leaf_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int depth() const;
};

struct ClassifierModel {
  ClassifierSpec spec;
  std::vector<std::string> label_set;
  Eigen::Index n_features = 0;

  // logreg / linear_svc: one row of weights per class.
  Matrix weights;
  Vector intercepts;
  /// linear_svc objective after every accepted epoch, per class.
  std::vector<std::vector<double>> objective_history;
  int epochs_run = 0;

  // knn
  Matrix train_x;
  std::vector<int> train_y;

  // mlp
  MlpWeights mlp;
  std::vector<double> loss_history;

  // dectree / randforest
  std::vector<DecisionTree> trees;
};

/// Label set is taken in order of first appearance in `y`.
ClassifierModel fit_classifier(const ClassifierSpec& spec, const EncodedMatrix& x,
                               const std::vector<std::string>& y);
/// As above with an explicit label set; every label in `y` must belong to it.
ClassifierModel fit_classifier(const ClassifierSpec& spec, const Eigen::Ref<const Matrix>& x,
                               const std::vector<std::string>& y,
                               const std::vector<std::string>& label_set);

/// Per-row class scores (n x |label_set|): probabilities, margins, vote
/// fractions or leaf distributions depending on the algorithm.
Matrix class_scores(const ClassifierModel& model, const Eigen::Ref<const Matrix>& x);

std::vector<std::string> predict(const ClassifierModel& model, const EncodedMatrix& x);
std::vector<std::string> predict(const ClassifierModel& model, const Eigen::Ref<const Matrix>& x);

/// Top-k labels per row, best first; equal scores keep label-set order.
std::vector<std::vector<std::string>> predict_ranked(const ClassifierModel& model,
                                                     const Eigen::Ref<const Matrix>& x, int k);

/// JSON container with a format version, the spec, the label set and the
/// fitted parameters.
void save_classifier(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_classifier(const std::filesystem::path& path);

// Internal building blocks shared with the tree implementation.
namespace detail {
struct TreeBuildOptions {
  int max_depth = 0;
  int min_samples_split = 2;
  /// Features examined per split; <= 0 or >= d means all.
  int max_features = -1;
};

DecisionTree build_tree(const Eigen::Ref<const Matrix>& x, const std::vector<int>& y, int n_classes,
                        const std::vector<double>& sample_weight, const TreeBuildOptions& options,
                        std::uint64_t seed);
}  // namespace detail

}  // namespace mathenc
