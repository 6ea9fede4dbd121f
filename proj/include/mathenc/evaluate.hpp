#pragma once

#include "mathenc/classify.hpp"
#include "mathenc/cluster.hpp"
#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mathenc {

struct FoldPlan {
  std::size_t n_samples = 0;
  int n_folds = 10;
  /// Fold index of every sample.
  std::vector<int> assignments;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

/// Seeded shuffle, then contiguous blocks; the first n % n_folds folds get
/// one extra sample.
FoldPlan make_folds(std::size_t n, int n_folds, std::uint64_t seed);

struct ConfusionMatrix {
  std::vector<std::string> label_set;
  /// Row = true label, column = predicted label.
  Eigen::MatrixXi counts;

  explicit ConfusionMatrix(std::vector<std::string> labels = {});
  void add(const std::vector<std::string>& truth, const std::vector<std::string>& predicted);
  long total() const;
  double accuracy() const;
  /// Rows normalised to percentages; empty rows stay zero.
  Matrix row_percentages() const;
};

/// Fraction of matching entries.
double accuracy(const std::vector<std::string>& truth, const std::vector<std::string>& predicted);

struct CrossValidationResult {
  /// Unweighted mean of the fold accuracies.
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracies;
  ConfusionMatrix confusion;
};

/// Encoder fitted on each training fold, then applied to its test fold.
std::vector<SplitEncoding> encode_folds(const EncodingSpec& encoding, const EncodingInput& input,
                                        const FoldPlan& plan);

CrossValidationResult cross_validate(const ClassifierSpec& spec, const std::vector<SplitEncoding>& folds,
                                     const std::vector<std::string>& labels,
                                     const std::vector<std::string>& label_set, const FoldPlan& plan);

CrossValidationResult cross_validate(const ClassifierSpec& spec, const EncodingSpec& encoding,
                                     const Corpus& corpus, const FoldPlan& plan,
                                     const StreamOptions& options = {});

/// Unweighted mean over clusters of the majority-class fraction.
double purity(const std::vector<int>& cluster_ids, const std::vector<std::string>& labels);
double purity(const ClusterAssignment& assignment, const std::vector<std::string>& labels);
/// Majority counts summed over clusters, divided by the sample count.
double weighted_purity(const std::vector<int>& cluster_ids, const std::vector<std::string>& labels);
double weighted_purity(const ClusterAssignment& assignment, const std::vector<std::string>& labels);

/// Sample Pearson correlation; throws ZeroVariance for a constant series.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Pearson correlation between the cosine similarities of all row pairs
/// i < j in the two encodings.
double text_math_correlation(const EncodedMatrix& text, const EncodedMatrix& math);

using NamedTask = std::pair<std::string, std::function<void()>>;

/// Runs the tasks one after another and returns wall-clock times scaled so
/// the slowest is 100.
std::vector<std::pair<std::string, double>> measure_runtime(const std::vector<NamedTask>& tasks);
/// Scales raw durations so the largest is exactly 100.
std::vector<double> relative_runtimes(const std::vector<double>& seconds);

/// Grid of scores in percent; rows are encodings, columns algorithms.
struct EvaluationReport {
  std::string corner = "Encoding/Classifier";
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  /// Highlighting is computed separately for each group of columns.
  std::vector<int> column_groups;
  std::vector<std::vector<std::optional<double>>> cells;

  std::vector<std::optional<double>> row_means;
  std::vector<std::optional<double>> row_maxima;
  std::vector<std::optional<double>> column_means;
  std::vector<std::optional<double>> column_maxima;
  std::optional<double> mean_of_means;
  std::optional<double> overall_max;

  /// One entry per column, max exactly 100; empty when not measured.
  std::vector<double> runtimes_percent;

  std::optional<std::size_t> best_row_mean;
  std::optional<std::size_t> best_row_max;
  /// Per column group.
  std::vector<std::optional<std::size_t>> best_column_mean;
  std::vector<std::optional<std::size_t>> best_column_max;
  std::optional<std::size_t> fastest_column;

  std::map<std::string, std::string> metadata;
};

/// Missing cells (failed runs) are left out of means and maxima.
EvaluationReport build_report(std::vector<std::string> rows, std::vector<std::string> columns,
                              std::vector<std::vector<std::optional<double>>> cells,
                              const std::vector<double>& runtime_seconds = {},
                              std::map<std::string, std::string> metadata = {},
                              std::vector<int> column_groups = {});

/// Grid plus Mean/Max rows and columns; runtimes are left out so that the
/// file depends only on the scores.
std::string report_csv(const EvaluationReport& report);
/// Table with Mean/Max rows and columns, a Runtime [%] row and highlight marks.
std::string report_markdown(const EvaluationReport& report, const std::string& title = {});

std::string confusion_csv(const ConfusionMatrix& confusion, bool percentages = false);

}  // namespace mathenc
