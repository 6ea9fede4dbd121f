#include "mathenc/cluster.hpp"

#include "mathenc/error.hpp"
#include "mathenc/pca.hpp"
#include "mathenc/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace mathenc {
namespace {

using nlohmann::json;

constexpr double kLog2Pi = 1.8378770664093454836;

// Nearest centre by direct squared distance; ties go to the lower index.
double assign(const Eigen::Ref<const Matrix>& x, const Matrix& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  labels.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = (x.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    inertia += best;
  }
  return inertia;
}

void update_centers(const Eigen::Ref<const Matrix>& x, const std::vector<int>& labels, Matrix& centers) {
  Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
  std::vector<double> counts(static_cast<std::size_t>(centers.rows()), 0.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1.0;
  }
  for (Eigen::Index c = 0; c < centers.rows(); ++c)
    if (counts[static_cast<std::size_t>(c)] > 0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
}

Vector row_log_sum_exp(const Matrix& m) {
  Vector out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out(i) = log_sum_exp(m.row(i).transpose());
  return out;
}

// Per-sample, per-component log(weight * density).
Matrix weighted_log_density(const GmmModel& model, const Eigen::Ref<const Matrix>& x) {
  const Eigen::Index k = model.means.rows();
  const auto d = static_cast<double>(x.cols());
  Matrix out(x.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Eigen::RowVectorXd inv = model.variances.row(c).cwiseInverse();
    const double log_det = model.variances.row(c).array().log().sum();
    const double log_w = model.weights(c) > 0 ? std::log(model.weights(c)) : -std::numeric_limits<double>::infinity();
    const Vector maha = (x.rowwise() - model.means.row(c)).array().square().matrix() * inv.transpose();
    out.col(c) = (-0.5 * (maha.array() + d * kLog2Pi + log_det) + log_w).matrix();
  }
  return out;
}

json spec_to_json(const ClustererSpec& s) {
  json j = {{"algo", to_string(s.algo)},
            {"k", s.k ? json(*s.k) : json(nullptr)},
            {"seed", s.seed},
            {"pca_dims", s.pca_dims ? json(*s.pca_dims) : json(nullptr)}};
  switch (s.algo) {
    case ClusterAlgo::kmeans:
    case ClusterAlgo::agglomerative:
      j["params"] = {{"max_iter", s.kmeans.max_iter}, {"n_init", s.kmeans.n_init}};
      if (s.algo == ClusterAlgo::agglomerative) j["params"] = {{"linkage", "ward"}};
      break;
    case ClusterAlgo::gmm:
      j["params"] = {{"max_iter", s.gmm.max_iter}, {"tol", s.gmm.tol},
                     {"covariance_floor", s.gmm.covariance_floor}, {"covariance", "diagonal"}};
      break;
    case ClusterAlgo::affinity:
      j["params"] = {{"damping", s.affinity.damping},
                     {"max_iter", s.affinity.max_iter},
                     {"convergence_iter", s.affinity.convergence_iter},
                     {"preference", s.affinity.preference ? json(*s.affinity.preference) : json("median")}};
      break;
    case ClusterAlgo::meanshift:
      j["params"] = {{"quantile", s.meanshift.quantile},
                     {"bandwidth", s.meanshift.bandwidth ? json(*s.meanshift.bandwidth) : json("estimated")},
                     {"max_iter", s.meanshift.max_iter}, {"kernel", "flat"}};
      break;
  }
  return j;
}

}  // namespace

std::string_view to_string(ClusterAlgo algo) {
  switch (algo) {
    case ClusterAlgo::kmeans: return "kmeans";
    case ClusterAlgo::agglomerative: return "agglomerative";
    case ClusterAlgo::gmm: return "gmm";
    case ClusterAlgo::affinity: return "affinity";
    case ClusterAlgo::meanshift: return "meanshift";
  }
  return "kmeans";
}

std::string_view display_name(ClusterAlgo algo) {
  switch (algo) {
    case ClusterAlgo::kmeans: return "KMeans";
    case ClusterAlgo::agglomerative: return "Agglomerative";
    case ClusterAlgo::gmm: return "GaussMixture";
    case ClusterAlgo::affinity: return "AffinityProp";
    case ClusterAlgo::meanshift: return "MeanShift";
  }
  return "KMeans";
}

ClusterAlgo parse_cluster_algo(std::string_view name) {
  for (auto algo : {ClusterAlgo::kmeans, ClusterAlgo::agglomerative, ClusterAlgo::gmm,
                    ClusterAlgo::affinity, ClusterAlgo::meanshift})
    if (name == to_string(algo)) return algo;
  throw Error(ErrorCode::invalid_argument, "unknown clusterer '" + std::string(name) + "'");
}

bool requires_k(ClusterAlgo algo) {
  return algo == ClusterAlgo::kmeans || algo == ClusterAlgo::agglomerative || algo == ClusterAlgo::gmm;
}

void ClustererSpec::validate() const {
  if (requires_k(algo) && !k)
    throw Error(ErrorCode::invalid_argument, std::string(to_string(algo)) + " requires k");
  if (!requires_k(algo) && k)
    throw Error(ErrorCode::invalid_argument, std::string(to_string(algo)) + " does not accept k");
  if (k && *k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (pca_dims && *pca_dims < 1) throw Error(ErrorCode::invalid_argument, "pca_dims must be at least 1");
  if (kmeans.max_iter < 1 || kmeans.n_init < 1)
    throw Error(ErrorCode::invalid_argument, "kmeans parameters out of range");
  if (gmm.max_iter < 1 || !(gmm.tol >= 0) || !(gmm.covariance_floor > 0))
    throw Error(ErrorCode::invalid_argument, "gmm parameters out of range");
  if (!(affinity.damping >= 0.5 && affinity.damping < 1.0) || affinity.max_iter < 1 ||
      affinity.convergence_iter < 1)
    throw Error(ErrorCode::invalid_argument, "affinity parameters out of range");
  if (!(meanshift.quantile > 0 && meanshift.quantile <= 1) || meanshift.max_iter < 1 ||
      (meanshift.bandwidth && !(*meanshift.bandwidth > 0)))
    throw Error(ErrorCode::invalid_argument, "meanshift parameters out of range");
}

std::string ClustererSpec::name() const {
  std::string out(to_string(algo));
  if (k) out += "_k" + std::to_string(*k);
  if (pca_dims) out += "_pca" + std::to_string(*pca_dims);
  return out;
}

void ClusterAssignment::validate() const {
  if (sample_ids.size() != cluster_ids.size())
    throw Error(ErrorCode::length_mismatch, "sample ids and cluster ids differ in length");
  std::vector<char> used(static_cast<std::size_t>(std::max(n_clusters, 0)), 0);
  for (int c : cluster_ids) {
    if (c < 0 || c >= n_clusters) throw Error(ErrorCode::invalid_argument, "cluster id out of range");
    used[static_cast<std::size_t>(c)] = 1;
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw Error(ErrorCode::invalid_argument, "cluster ids are not dense");
}

std::vector<int> dense_labels(const std::vector<int>& labels, int* n_clusters) {
  std::unordered_map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  if (n_clusters) *n_clusters = static_cast<int>(remap.size());
  return out;
}

Matrix kmeans_plus_plus(const Eigen::Ref<const Matrix>& x, int k, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  Rng rng(seed);
  Matrix centers(k, x.cols());
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));

  auto distances_to = [&](Eigen::Index j) {
    return Vector((x.rowwise() - x.row(j)).rowwise().squaredNorm());
  };
  Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
  centers.row(0) = x.row(first);
  Vector closest = distances_to(first);

  for (int c = 1; c < k; ++c) {
    std::vector<double> cdf(static_cast<std::size_t>(n));
    std::partial_sum(closest.data(), closest.data() + n, cdf.begin());
    const double total = cdf.back();
    Eigen::Index chosen = 0;
    Vector chosen_dist;
    if (!(total > 0)) {
      chosen = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
      chosen_dist = distances_to(chosen);
    } else {
      double best_potential = std::numeric_limits<double>::infinity();
      for (int t = 0; t < trials; ++t) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto candidate = static_cast<Eigen::Index>(
            std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(n) - 1));
        Vector dist = distances_to(candidate).cwiseMin(closest);
        const double potential = dist.sum();
        if (potential < best_potential) {
          best_potential = potential;
          chosen = candidate;
          chosen_dist = std::move(dist);
        }
      }
    }
    centers.row(c) = x.row(chosen);
    closest = chosen_dist.cwiseMin(closest);
  }
  return centers;
}

KmeansResult lloyd(const Eigen::Ref<const Matrix>& x, Matrix centers, int max_iter) {
  KmeansResult r;
  std::vector<int> labels;
  for (int it = 0; it < max_iter; ++it) {
    const double inertia = assign(x, centers, labels);
    r.history.push_back(inertia);
    r.iterations = it + 1;
    if (it > 0 && labels == r.labels) {
      r.converged = true;
      break;
    }
    r.labels = labels;
    update_centers(x, r.labels, centers);
  }
  r.centers = std::move(centers);
  r.inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    r.inertia += (x.row(i) - r.centers.row(r.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return r;
}

KmeansResult kmeans(const Eigen::Ref<const Matrix>& x, int k, const KmeansParams& params,
                    std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (k > x.rows())
    throw Error(ErrorCode::k_exceeds_samples, "k=" + std::to_string(k) + " exceeds " +
                                                  std::to_string(x.rows()) + " samples");
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < params.n_init; ++run) {
    KmeansResult r = lloyd(x, kmeans_plus_plus(x, k, derive_seed(seed, static_cast<std::uint64_t>(run))),
                           params.max_iter);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

std::vector<int> ward_agglomerative(const Eigen::Ref<const Matrix>& x, int k) {
  const Eigen::Index n = x.rows();
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (k > n)
    throw Error(ErrorCode::k_exceeds_samples, "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " samples");

  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) dist(i, j) = dist(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  std::vector<double> size(static_cast<std::size_t>(n), 1.0);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<int> owner(static_cast<std::size_t>(n));
  std::iota(owner.begin(), owner.end(), 0);

  for (Eigen::Index merges = 0; merges < n - k; ++merges) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0) break;
    const double ni = size[static_cast<std::size_t>(bi)];
    const double nj = size[static_cast<std::size_t>(bj)];
    for (Eigen::Index m = 0; m < n; ++m) {
      if (!active[static_cast<std::size_t>(m)] || m == bi || m == bj) continue;
      const double nm = size[static_cast<std::size_t>(m)];
      const double d = ((ni + nm) * dist(bi, m) + (nj + nm) * dist(bj, m) - nm * dist(bi, bj)) / (ni + nj + nm);
      dist(bi, m) = dist(m, bi) = d;
    }
    size[static_cast<std::size_t>(bi)] = ni + nj;
    active[static_cast<std::size_t>(bj)] = 0;
    for (auto& o : owner)
      if (o == bj) o = static_cast<int>(bi);
  }
  return dense_labels(owner);
}

double gmm_loglik(const GmmModel& model, const Eigen::Ref<const Matrix>& x) {
  return row_log_sum_exp(weighted_log_density(model, x)).sum();
}

Matrix gmm_responsibilities(const GmmModel& model, const Eigen::Ref<const Matrix>& x) {
  Matrix logp = weighted_log_density(model, x);
  const Vector lse = row_log_sum_exp(logp);
  logp.colwise() -= lse;
  return logp.array().exp();
}

GmmModel fit_gmm(const Eigen::Ref<const Matrix>& x, int k, const GmmParams& params, std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const KmeansResult init = kmeans(x, k, KmeansParams{}, derive_seed(seed, 0));

  GmmModel model;
  Matrix resp = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, init.labels[static_cast<std::size_t>(i)]) = 1.0;
  model.means = init.centers;
  model.variances = Matrix::Constant(k, d, 1.0);
  model.weights = Vector::Constant(k, 1.0 / k);

  auto m_step = [&]() {
    const Vector nk = resp.colwise().sum().transpose();
    for (Eigen::Index c = 0; c < k; ++c) {
      if (!(nk(c) > 0)) {
        model.weights(c) = 0.0;
        continue;
      }
      model.weights(c) = nk(c) / static_cast<double>(n);
      const Eigen::RowVectorXd mean = resp.col(c).transpose() * x / nk(c);
      model.means.row(c) = mean;
      const Eigen::RowVectorXd var =
          resp.col(c).transpose() * (x.rowwise() - mean).array().square().matrix() / nk(c);
      model.variances.row(c) = var.cwiseMax(params.covariance_floor);
    }
  };

  m_step();
  double previous = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < params.max_iter; ++it) {
    Matrix logp = weighted_log_density(model, x);
    const Vector lse = row_log_sum_exp(logp);
    const double ll = lse.sum();
    model.loglik_history.push_back(ll);
    model.iterations = it + 1;
    if (std::abs(ll - previous) / static_cast<double>(n) < params.tol) {
      model.converged = true;
      break;
    }
    previous = ll;
    logp.colwise() -= lse;
    resp = logp.array().exp();
    m_step();
  }
  if (!model.converged) model.loglik_history.push_back(gmm_loglik(model, x));
  return model;
}

AffinityResult affinity_propagation(const Eigen::Ref<const Matrix>& x, const AffinityParams& params,
                                    std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  AffinityResult result;
  if (n == 1) {
    result.labels = {0};
    result.exemplar_of = {0};
    result.exemplars = {0};
    result.responsibility = result.availability = Matrix::Zero(1, 1);
    result.converged = true;
    return result;
  }

  Matrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) s(i, j) = s(j, i) = -(x.row(i) - x.row(j)).squaredNorm();
  double preference = 0.0;
  if (params.preference) {
    preference = *params.preference;
  } else {
    std::vector<double> off;
    off.reserve(static_cast<std::size_t>(n * (n - 1)));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) off.push_back(s(i, j));
    const auto mid = off.size() / 2;
    std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid), off.end());
    preference = off[mid];
    if (off.size() % 2 == 0) {
      const double lower = *std::max_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(mid));
      preference = 0.5 * (preference + lower);
    }
  }
  s.diagonal().setConstant(preference);

  // Tiny seeded jitter breaks exact ties between candidate exemplars.
  Rng rng(seed);
  const double tiny = std::numeric_limits<double>::min() * 100.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s.data()[i] += (std::numeric_limits<double>::epsilon() * s.data()[i] + tiny) * rng.uniform();

  Matrix r = Matrix::Zero(n, n);
  Matrix a = Matrix::Zero(n, n);
  const double lambda = params.damping;
  std::vector<char> exemplar(static_cast<std::size_t>(n), 0), previous_exemplar;
  int stable = 0;
  for (int it = 0; it < params.max_iter; ++it) {
    result.iterations = it + 1;
    // Responsibilities.
    const Matrix as = a + s;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      double first = -std::numeric_limits<double>::infinity();
      double second = first;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double v = as(i, k);
        if (v > first) {
          second = first;
          first = v;
          arg = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const double fresh = s(i, k) - (k == arg ? second : first);
        r(i, k) = lambda * r(i, k) + (1.0 - lambda) * fresh;
      }
    }
    // Availabilities.
    Matrix rp = r.cwiseMax(0.0);
    rp.diagonal() = r.diagonal();
    const Eigen::RowVectorXd col = rp.colwise().sum();
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double fresh = col(k) - rp(i, k);
        if (i != k) fresh = std::min(0.0, fresh);
        a(i, k) = lambda * a(i, k) + (1.0 - lambda) * fresh;
      }
    }

    int count = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      exemplar[static_cast<std::size_t>(k)] = a(k, k) + r(k, k) > 0;
      count += exemplar[static_cast<std::size_t>(k)];
    }
    stable = (exemplar == previous_exemplar && count > 0) ? stable + 1 : 0;
    previous_exemplar = exemplar;
    if (stable >= params.convergence_iter) {
      result.converged = true;
      break;
    }
  }

  const Matrix score = a + r;
  result.exemplar_of.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < n; ++k)
      if (score(i, k) > score(i, arg)) arg = k;
    result.exemplar_of[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  result.exemplars = result.exemplar_of;
  std::sort(result.exemplars.begin(), result.exemplars.end());
  result.exemplars.erase(std::unique(result.exemplars.begin(), result.exemplars.end()), result.exemplars.end());
  result.labels = dense_labels(result.exemplar_of);
  result.responsibility = std::move(r);
  result.availability = std::move(a);
  return result;
}

double estimate_bandwidth(const Eigen::Ref<const Matrix>& x, double quantile) {
  const Eigen::Index n = x.rows();
  if (n < 2) return 0.0;
  const auto rank = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::ceil(quantile * static_cast<double>(n))), 1, n - 1);
  std::vector<double> row(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t o = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) row[o++] = (x.row(i) - x.row(j)).squaredNorm();
    std::nth_element(row.begin(), row.begin() + (rank - 1), row.end());
    total += std::sqrt(row[static_cast<std::size_t>(rank - 1)]);
  }
  return total / static_cast<double>(n);
}

MeanShiftResult mean_shift(const Eigen::Ref<const Matrix>& x, const MeanShiftParams& params) {
  const Eigen::Index n = x.rows();
  MeanShiftResult result;
  result.bandwidth = params.bandwidth ? *params.bandwidth : estimate_bandwidth(x, params.quantile);
  // Coincident samples give a zero estimate; any positive radius then
  // groups exactly the coincident points.
  const double bw = result.bandwidth > 0 ? result.bandwidth : 1e-12;
  const double bw2 = bw * bw;
  const double stop = 1e-3 * bw;

  Matrix seeds = x;
  std::vector<char> moving(static_cast<std::size_t>(n), 1);
  std::vector<Eigen::Index> intensity(static_cast<std::size_t>(n), 0);
  for (int it = 0; it < params.max_iter; ++it) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < n; ++i)
      if (moving[static_cast<std::size_t>(i)]) active.push_back(i);
    if (active.empty()) break;
    result.iterations = it + 1;
    Matrix block(static_cast<Eigen::Index>(active.size()), x.cols());
    for (std::size_t a = 0; a < active.size(); ++a) block.row(static_cast<Eigen::Index>(a)) = seeds.row(active[a]);
    const Matrix d2 = squared_distances(block, x);
    const Matrix within = (d2.array() <= bw2).cast<double>();
    const Vector counts = within.rowwise().sum();
    const Matrix next = within * x;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto row = static_cast<Eigen::Index>(a);
      const Eigen::Index i = active[a];
      if (counts(row) == 0) {
        moving[static_cast<std::size_t>(i)] = 0;
        continue;
      }
      const Eigen::RowVectorXd mean = next.row(row) / counts(row);
      const double shift = (mean - seeds.row(i)).norm();
      seeds.row(i) = mean;
      intensity[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(counts(row));
      if (shift <= stop) moving[static_cast<std::size_t>(i)] = 0;
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return intensity[static_cast<std::size_t>(a)] > intensity[static_cast<std::size_t>(b)];
  });
  std::vector<Eigen::Index> kept;
  const double merge2 = 0.25 * bw2;
  for (Eigen::Index i : order) {
    bool near = false;
    for (Eigen::Index m : kept)
      if ((seeds.row(i) - seeds.row(m)).squaredNorm() <= merge2) {
        near = true;
        break;
      }
    if (!near) kept.push_back(i);
  }
  // A seed whose window holds only itself is an isolated sample, not a mode.
  if (intensity[static_cast<std::size_t>(kept.front())] > 1)
    std::erase_if(kept, [&](Eigen::Index m) { return intensity[static_cast<std::size_t>(m)] <= 1; });
  result.modes.resize(static_cast<Eigen::Index>(kept.size()), x.cols());
  for (std::size_t m = 0; m < kept.size(); ++m) result.modes.row(static_cast<Eigen::Index>(m)) = seeds.row(kept[m]);

  std::vector<int> labels;
  assign(x, result.modes, labels);
  result.labels = dense_labels(labels);
  return result;
}

ClusterAssignment fit_predict_clusterer(const ClustererSpec& spec, const EncodedMatrix& m) {
  spec.validate();
  if (spec.k && *spec.k > m.rows())
    throw Error(ErrorCode::k_exceeds_samples, "k=" + std::to_string(*spec.k) + " exceeds " +
                                                  std::to_string(m.rows()) + " samples");
  if (m.rows() < 1) throw Error(ErrorCode::too_few_samples, "nothing to cluster");
  Matrix x = m.features;
  if (spec.pca_dims) x = pca_transform(fit_pca(x, *spec.pca_dims), x);

  ClusterAssignment out;
  out.sample_ids = m.sample_ids;
  out.spec = spec;
  auto& diag = out.diagnostics;
  std::vector<int> labels;
  switch (spec.algo) {
    case ClusterAlgo::kmeans: {
      auto r = kmeans(x, *spec.k, spec.kmeans, spec.seed);
      labels = std::move(r.labels);
      diag.converged = r.converged;
      diag.iterations = r.iterations;
      diag.objective = r.inertia;
      diag.history = std::move(r.history);
      break;
    }
    case ClusterAlgo::agglomerative:
      labels = ward_agglomerative(x, *spec.k);
      diag.iterations = static_cast<int>(x.rows()) - *spec.k;
      break;
    case ClusterAlgo::gmm: {
      const GmmModel g = fit_gmm(x, *spec.k, spec.gmm, spec.seed);
      const Matrix resp = gmm_responsibilities(g, x);
      labels.resize(static_cast<std::size_t>(x.rows()));
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Index arg = 0;
        for (Eigen::Index c = 1; c < resp.cols(); ++c)
          if (resp(i, c) > resp(i, arg)) arg = c;
        labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
      }
      diag.converged = g.converged;
      diag.iterations = g.iterations;
      diag.objective = g.loglik_history.back();
      diag.history = g.loglik_history;
      break;
    }
    case ClusterAlgo::affinity: {
      auto r = affinity_propagation(x, spec.affinity, spec.seed);
      labels = std::move(r.labels);
      diag.converged = r.converged;
      diag.iterations = r.iterations;
      break;
    }
    case ClusterAlgo::meanshift: {
      auto r = mean_shift(x, spec.meanshift);
      labels = std::move(r.labels);
      diag.iterations = r.iterations;
      diag.objective = r.bandwidth;
      break;
    }
  }
  out.cluster_ids = dense_labels(labels, &out.n_clusters);
  return out;
}

void write_assignment(const ClusterAssignment& a, const std::filesystem::path& csv_path) {
  a.validate();
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + csv_path.string());
  out << "sample_id,cluster_id\n";
  for (std::size_t i = 0; i < a.sample_ids.size(); ++i) out << a.sample_ids[i] << ',' << a.cluster_ids[i] << '\n';

  json side = {{"spec", spec_to_json(a.spec)},
               {"n_clusters", a.n_clusters},
               {"diagnostics",
                {{"converged", a.diagnostics.converged},
                 {"iterations", a.diagnostics.iterations},
                 {"objective", a.diagnostics.objective},
                 {"history", a.diagnostics.history}}}};
  std::ofstream sidecar(sidecar_path(csv_path), std::ios::binary);
  if (!sidecar) throw Error(ErrorCode::io_error, "cannot write " + sidecar_path(csv_path).string());
  sidecar << side.dump(2) << '\n';
}

}  // namespace mathenc
