#pragma once

#include "mathenc/encode.hpp"
#include "mathenc/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mathenc {

enum class ClusterAlgo { kmeans, agglomerative, gmm, affinity, meanshift };

std::string_view to_string(ClusterAlgo algo);
ClusterAlgo parse_cluster_algo(std::string_view name);
/// Column heading used in reports, e.g. "KMeans".
std::string_view display_name(ClusterAlgo algo);
/// True for the fixed-k family.
bool requires_k(ClusterAlgo algo);

struct KmeansParams {
  int max_iter = 300;
  int n_init = 10;
};

struct GmmParams {
  int max_iter = 200;
  /// Convergence threshold on the change of the mean per-sample log-likelihood.
  double tol = 1e-4;
  double covariance_floor = 1e-6;
};

struct AffinityParams {
  double damping = 0.5;
  int max_iter = 200;
  int convergence_iter = 15;
  /// Defaults to the median off-diagonal similarity.
  std::optional<double> preference;
};

struct MeanShiftParams {
  double quantile = 0.3;
  /// Overrides the estimated bandwidth when set.
  std::optional<double> bandwidth;
  int max_iter = 300;
};

struct ClustererSpec {
  ClusterAlgo algo = ClusterAlgo::kmeans;
  std::optional<int> k;
  KmeansParams kmeans;
  GmmParams gmm;
  AffinityParams affinity;
  MeanShiftParams meanshift;
  std::uint64_t seed = 0;
  std::optional<int> pca_dims;

  void validate() const;
  /// e.g. "kmeans_k14" or "meanshift_pca50".
  std::string name() const;
};

struct ClusterDiagnostics {
  bool converged = true;
  int iterations = 0;
  /// Inertia (kmeans), total log-likelihood (gmm) or bandwidth (meanshift).
  double objective = 0.0;
  std::vector<double> history;
};

struct ClusterAssignment {
  std::vector<std::string> sample_ids;
  std::vector<int> cluster_ids;
  int n_clusters = 0;
  ClustererSpec spec;
  ClusterDiagnostics diagnostics;

  /// Throws unless ids are dense 0..n_clusters-1 and lengths match.
  void validate() const;
};

/// Renumbers labels 0.. in order of first appearance.
std::vector<int> dense_labels(const std::vector<int>& labels, int* n_clusters = nullptr);

struct KmeansResult {
  std::vector<int> labels;
  Matrix centers;
  double inertia = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Inertia after every assignment step.
  std::vector<double> history;
};

/// Greedy k-means++ seeding.
Matrix kmeans_plus_plus(const Eigen::Ref<const Matrix>& x, int k, std::uint64_t seed);
/// Lloyd iterations from the given centres; empty clusters keep their centre.
KmeansResult lloyd(const Eigen::Ref<const Matrix>& x, Matrix centers, int max_iter);
/// Best of `n_init` seeded runs by inertia.
KmeansResult kmeans(const Eigen::Ref<const Matrix>& x, int k, const KmeansParams& params,
                    std::uint64_t seed);

/// Ward linkage, merged bottom-up until k clusters remain.
std::vector<int> ward_agglomerative(const Eigen::Ref<const Matrix>& x, int k);

struct GmmModel {
  Vector weights;
  Matrix means;      // k x d
  Matrix variances;  // k x d, diagonal covariances
  std::vector<double> loglik_history;
  int iterations = 0;
  bool converged = false;
};

GmmModel fit_gmm(const Eigen::Ref<const Matrix>& x, int k, const GmmParams& params, std::uint64_t seed);
/// Total log-likelihood of the rows of `x`.
double gmm_loglik(const GmmModel& model, const Eigen::Ref<const Matrix>& x);
Matrix gmm_responsibilities(const GmmModel& model, const Eigen::Ref<const Matrix>& x);

struct AffinityResult {
  std::vector<int> labels;
  /// Exemplar sample index for every sample.
  std::vector<int> exemplar_of;
  std::vector<int> exemplars;
  Matrix responsibility;
  Matrix availability;
  int iterations = 0;
  bool converged = false;
};

AffinityResult affinity_propagation(const Eigen::Ref<const Matrix>& x, const AffinityParams& params,
                                    std::uint64_t seed);

/// Mean distance from each sample to its ceil(quantile * n)-th nearest other sample.
double estimate_bandwidth(const Eigen::Ref<const Matrix>& x, double quantile);

struct MeanShiftResult {
  std::vector<int> labels;
  Matrix modes;
  double bandwidth = 0.0;
  int iterations = 0;
};

MeanShiftResult mean_shift(const Eigen::Ref<const Matrix>& x, const MeanShiftParams& params);

/// Applies the optional PCA pre-reduction, then the selected algorithm.
ClusterAssignment fit_predict_clusterer(const ClustererSpec& spec, const EncodedMatrix& x);

/// CSV `sample_id,cluster_id` plus a JSON sidecar with the spec and diagnostics.
void write_assignment(const ClusterAssignment& assignment, const std::filesystem::path& csv_path);

}  // namespace mathenc
