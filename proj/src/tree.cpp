#include "mathenc/classify.hpp"

#include "mathenc/random.hpp"

#include <algorithm>
#include <numeric>

namespace mathenc {

const Vector& DecisionTree::leaf_distribution(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes[node].feature >= 0) {
    const auto& n = nodes[node];
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[node].distribution;
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, depth[i]);
    if (nodes[i].feature >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  return best;
}

namespace detail {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of sum_k c_k^2 / w
};

class TreeBuilder {
public:
  TreeBuilder(const Eigen::Ref<const Matrix>& x, const std::vector<int>& y, int n_classes,
              const std::vector<double>& weight, const TreeBuildOptions& options, std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), weight_(weight), options_(options), rng_(seed) {
    const int d = static_cast<int>(x.cols());
    features_per_split_ = options.max_features <= 0 || options.max_features >= d ? d : options.max_features;
    all_features_.resize(d);
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  DecisionTree build() {
    std::vector<int> samples;
    for (int i = 0; i < static_cast<int>(y_.size()); ++i)
      if (weight_[i] > 0) samples.push_back(i);
    grow(samples, 0);
    return std::move(tree_);
  }

private:
  int grow(std::vector<int>& samples, int depth) {
    Vector counts = Vector::Zero(n_classes_);
    double total = 0.0;
    for (int i : samples) {
      counts(y_[i]) += weight_[i];
      total += weight_[i];
    }

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[id].distribution = total > 0 ? Vector(counts / total) : counts;

    const bool pure = (counts.array() > 0).count() <= 1;
    const bool depth_capped = options_.max_depth > 0 && depth >= options_.max_depth;
    if (pure || depth_capped || static_cast<int>(samples.size()) < options_.min_samples_split) return id;

    const Split split = find_split(samples);
    if (split.feature < 0) return id;

    std::vector<int> left, right;
    for (int i : samples) (x_(i, split.feature) <= split.threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split find_split(const std::vector<int>& samples) {
    const int d = static_cast<int>(all_features_.size());
    std::vector<int> order;
    if (features_per_split_ == d) {
      order = all_features_;
    } else {
      // Partial Fisher-Yates; the drawn block is scanned first, the rest only
      // if the drawn features admit no split.
      order = all_features_;
      for (int i = 0; i < features_per_split_; ++i)
        std::swap(order[i], order[i + rng_.index(static_cast<std::size_t>(d - i))]);
      std::sort(order.begin(), order.begin() + features_per_split_);
      std::sort(order.begin() + features_per_split_, order.end());
    }

    Split best;
    for (int pos = 0; pos < d; ++pos) {
      if (pos == features_per_split_ && best.feature >= 0) break;
      evaluate_feature(order[pos], samples, best);
    }
    return best;
  }

  void evaluate_feature(int f, const std::vector<int>& samples, Split& best) {
    values_.clear();
    for (int i : samples) values_.emplace_back(x_(i, f), i);
    std::sort(values_.begin(), values_.end());
    if (values_.front().first == values_.back().first) return;

    Vector left = Vector::Zero(n_classes_);
    Vector right = Vector::Zero(n_classes_);
    double wl = 0.0, wr = 0.0;
    for (const auto& [v, i] : values_) {
      right(y_[i]) += weight_[i];
      wr += weight_[i];
    }
    for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
      const int i = values_[k].second;
      left(y_[i]) += weight_[i];
      right(y_[i]) -= weight_[i];
      wl += weight_[i];
      wr -= weight_[i];
      const double lo = values_[k].first;
      const double hi = values_[k + 1].first;
      if (lo == hi) continue;
      const double score = left.squaredNorm() / wl + right.squaredNorm() / wr;
      if (score > best.score) {
        double threshold = lo + (hi - lo) / 2.0;
        if (!(threshold < hi)) threshold = lo;
        best = {f, threshold, score};
      }
    }
  }

  const Eigen::Ref<const Matrix>& x_;
  const std::vector<int>& y_;
  int n_classes_;
  const std::vector<double>& weight_;
  TreeBuildOptions options_;
  Rng rng_;
  int features_per_split_ = 0;
  std::vector<int> all_features_;
  std::vector<std::pair<double, int>> values_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree build_tree(const Eigen::Ref<const Matrix>& x, const std::vector<int>& y, int n_classes,
                        const std::vector<double>& sample_weight, const TreeBuildOptions& options,
                        std::uint64_t seed) {
  TreeBuilder builder(x, y, n_classes, sample_weight, options, seed);
  return builder.build();
}

}  // namespace detail
}  // namespace mathenc
