#include "mathenc/evaluate.hpp"

#include "mathenc/error.hpp"
#include "mathenc/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace mathenc {

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

FoldPlan make_folds(std::size_t n, int n_folds, std::uint64_t seed) {
  if (n_folds < 2 || static_cast<std::size_t>(n_folds) > n)
    throw Error(ErrorCode::too_few_samples, "cannot split " + std::to_string(n) + " samples into " +
                                                std::to_string(n_folds) + " folds");
  FoldPlan plan;
  plan.n_samples = n;
  plan.n_folds = n_folds;
  plan.seed = seed;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  plan.assignments.assign(n, 0);
  const std::size_t folds = static_cast<std::size_t>(n_folds);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) plan.assignments[order[pos++]] = static_cast<int>(f);
  }
  return plan;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : label_set(std::move(labels)),
      counts(Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(label_set.size()),
                                   static_cast<Eigen::Index>(label_set.size()))) {}

void ConfusionMatrix::add(const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::length_mismatch, "truth and prediction lengths differ");
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < label_set.size(); ++i) index.emplace(label_set[i], static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = index.find(truth[i]);
    const auto p = index.find(predicted[i]);
    if (t == index.end() || p == index.end())
      throw Error(ErrorCode::unknown_label, "label outside the confusion matrix label set");
    ++counts(t->second, p->second);
  }
}

long ConfusionMatrix::total() const { return counts.cast<long>().sum(); }

double ConfusionMatrix::accuracy() const {
  const long n = total();
  return n ? static_cast<double>(counts.trace()) / static_cast<double>(n) : 0.0;
}

Matrix ConfusionMatrix::row_percentages() const {
  Matrix out = counts.cast<double>();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum > 0) out.row(i) *= 100.0 / sum;
  }
  return out;
}

double accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::length_mismatch, "truth and prediction lengths differ");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<SplitEncoding> encode_folds(const EncodingSpec& encoding, const EncodingInput& input,
                                        const FoldPlan& plan) {
  if (input.ids.size() != plan.n_samples)
    throw Error(ErrorCode::length_mismatch, "fold plan and encoding input sizes differ");
  std::vector<SplitEncoding> folds;
  folds.reserve(static_cast<std::size_t>(plan.n_folds));
  for (int f = 0; f < plan.n_folds; ++f) {
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    folds.push_back(encode_split(encoding, input, train, test));
  }
  return folds;
}

CrossValidationResult cross_validate(const ClassifierSpec& spec, const std::vector<SplitEncoding>& folds,
                                     const std::vector<std::string>& labels,
                                     const std::vector<std::string>& label_set, const FoldPlan& plan) {
  if (labels.size() != plan.n_samples)
    throw Error(ErrorCode::length_mismatch, "fold plan and label counts differ");
  if (folds.size() != static_cast<std::size_t>(plan.n_folds))
    throw Error(ErrorCode::length_mismatch, "one encoding per fold is required");
  CrossValidationResult result{0.0, {}, ConfusionMatrix(label_set)};
  for (int f = 0; f < plan.n_folds; ++f) {
    std::vector<std::string> train_y, test_y;
    for (std::size_t i : plan.train_indices(f)) train_y.push_back(labels[i]);
    for (std::size_t i : plan.test_indices(f)) test_y.push_back(labels[i]);
    ClassifierSpec fold_spec = spec;
    fold_spec.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(f));
    const auto& enc = folds[static_cast<std::size_t>(f)];
    const ClassifierModel model = fit_classifier(fold_spec, enc.train.features, train_y, label_set);
    const auto predicted = predict(model, enc.test.features);
    result.fold_accuracies.push_back(accuracy(test_y, predicted));
    result.confusion.add(test_y, predicted);
  }
  result.mean_accuracy = std::accumulate(result.fold_accuracies.begin(), result.fold_accuracies.end(), 0.0) /
                         static_cast<double>(result.fold_accuracies.size());
  return result;
}

CrossValidationResult cross_validate(const ClassifierSpec& spec, const EncodingSpec& encoding,
                                     const Corpus& corpus, const FoldPlan& plan,
                                     const StreamOptions& options) {
  if (corpus.documents.empty()) throw Error(ErrorCode::too_few_samples, "empty corpus");
  StreamOptions opts = options;
  if (!opts.stopwords) opts.stopwords = &corpus.stopwords;
  const EncodingInput input = prepare_encoding_input(encoding, corpus.documents, opts);
  std::vector<std::string> labels, label_set;
  for (const auto& l : corpus.labels()) labels.push_back(l.name);
  for (const auto& l : corpus.label_set) label_set.push_back(l.name);
  return cross_validate(spec, encode_folds(encoding, input, plan), labels, label_set, plan);
}

namespace {

// Per cluster: (size, majority count).
std::vector<std::pair<std::size_t, std::size_t>> cluster_majorities(const std::vector<int>& ids,
                                                                    const std::vector<std::string>& labels) {
  if (ids.size() != labels.size())
    throw Error(ErrorCode::length_mismatch, std::to_string(ids.size()) + " cluster ids but " +
                                                std::to_string(labels.size()) + " labels");
  if (ids.empty()) throw Error(ErrorCode::invalid_argument, "no samples to score");
  std::map<int, std::map<std::string, std::size_t>> tally;
  for (std::size_t i = 0; i < ids.size(); ++i) ++tally[ids[i]][labels[i]];
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [cluster, counts] : tally) {
    std::size_t size = 0, best = 0;
    for (const auto& [label, c] : counts) {
      size += c;
      best = std::max(best, c);
    }
    out.emplace_back(size, best);
  }
  return out;
}

}  // namespace

double purity(const std::vector<int>& cluster_ids, const std::vector<std::string>& labels) {
  const auto majorities = cluster_majorities(cluster_ids, labels);
  double sum = 0.0;
  for (const auto& [size, best] : majorities) sum += static_cast<double>(best) / static_cast<double>(size);
  return sum / static_cast<double>(majorities.size());
}

double purity(const ClusterAssignment& assignment, const std::vector<std::string>& labels) {
  return purity(assignment.cluster_ids, labels);
}

double weighted_purity(const std::vector<int>& cluster_ids, const std::vector<std::string>& labels) {
  std::size_t hits = 0;
  for (const auto& [size, best] : cluster_majorities(cluster_ids, labels)) hits += best;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double weighted_purity(const ClusterAssignment& assignment, const std::vector<std::string>& labels) {
  return weighted_purity(assignment.cluster_ids, labels);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::length_mismatch, "series lengths differ");
  if (xs.size() < 2) throw Error(ErrorCode::too_few_samples, "pearson needs at least two points");
  const auto x = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const auto y = Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  const double sx = dx.squaredNorm();
  const double sy = dy.squaredNorm();
  // Rounding leaves a constant series with residue near machine epsilon.
  const double n = static_cast<double>(xs.size());
  const double eps = 1e-24;
  if (sx <= eps * n * std::max(1.0, x.squaredNorm() / n) || sy <= eps * n * std::max(1.0, y.squaredNorm() / n)) throw Error(ErrorCode::zero_variance, "a series is constant");
  return std::clamp(dx.dot(dy) / std::sqrt(sx * sy), -1.0, 1.0);
}

double text_math_correlation(const EncodedMatrix& text, const EncodedMatrix& math) {
  if (text.sample_ids != math.sample_ids || text.rows() != math.rows())
    throw Error(ErrorCode::length_mismatch, "encodings must cover the same samples in the same order");
  const Eigen::Index n = text.rows();
  if (n < 3) throw Error(ErrorCode::too_few_samples, "correlation needs at least three samples");
  const Matrix a = normalize_rows(text.features);
  const Matrix b = normalize_rows(math.features);
  const Matrix ga = a * a.transpose();
  const Matrix gb = b * b.transpose();
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  ys.reserve(xs.capacity());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xs.push_back(ga(i, j));
      ys.push_back(gb(i, j));
    }
  return pearson(xs, ys);
}

std::vector<double> relative_runtimes(const std::vector<double>& seconds) {
  if (seconds.empty()) return {};
  const double slowest = *std::max_element(seconds.begin(), seconds.end());
  std::vector<double> out;
  out.reserve(seconds.size());
  for (double s : seconds) out.push_back(slowest > 0 ? (s == slowest ? 100.0 : 100.0 * s / slowest) : 100.0);
  return out;
}

std::vector<std::pair<std::string, double>> measure_runtime(const std::vector<NamedTask>& tasks) {
  if (tasks.empty()) throw Error(ErrorCode::invalid_argument, "no tasks to time");
  std::vector<double> seconds;
  for (const auto& [name, task] : tasks) {
    const auto start = std::chrono::steady_clock::now();
    task();
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  const auto percent = relative_runtimes(seconds);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < tasks.size(); ++i) out.emplace_back(tasks[i].first, percent[i]);
  return out;
}

}  // namespace mathenc
