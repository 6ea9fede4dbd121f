#include "mathenc/classify.hpp"

#include "mathenc/error.hpp"
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

constexpr int kModelFormatVersion = 1;

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-m)), stable for large |m|.
inline double logistic_loss(double m) {
  return m >= 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::invalid_argument, message);
}

// Accelerated gradient descent with backtracking and adaptive restart.
Vector fit_logreg_binary(const Eigen::Ref<const Matrix>& x, const Vector& s, const LogregParams& p,
                         int& epochs) {
  const Eigen::Index dim = x.cols() + 1;
  Vector w = Vector::Zero(dim);
  Vector y = w;
  Vector g(dim), g_w(dim);
  double f_w = logreg_objective(x, s, p.C, w, &g_w);
  const double g0 = std::max(1.0, g_w.lpNorm<Eigen::Infinity>());
  double lipschitz = 1.0;
  double t = 1.0;
  epochs = 0;
  for (int epoch = 0; epoch < p.max_epochs; ++epoch) {
    epochs = epoch + 1;
    const double f_y = logreg_objective(x, s, p.C, y, &g);
    if (g.lpNorm<Eigen::Infinity>() <= p.tol * g0 && f_y <= f_w) {
      w = y;
      break;
    }
    Vector candidate;
    double f_c = 0.0;
    const double g_sq = g.squaredNorm();
    while (true) {
      candidate = y - g / lipschitz;
      f_c = logreg_objective(x, s, p.C, candidate, nullptr);
      if (f_c <= f_y - 0.5 * g_sq / lipschitz || lipschitz > 1e300) break;
      lipschitz *= 2.0;
    }
    if (f_c > f_w) {
      // Momentum overshot: restart from the last iterate.
      t = 1.0;
      y = w;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = candidate + ((t - 1.0) / t_next) * (candidate - w);
    t = t_next;
    w = std::move(candidate);
    f_w = f_c;
    lipschitz *= 0.9;
  }
  return w;
}

Vector svc_subgradient(const Eigen::Ref<const Matrix>& x, const Vector& s, double C, const Vector& wb) {
  const Eigen::Index d = x.cols();
  const Vector margins = s.array() * ((x * wb.head(d)).array() + wb(d));
  Vector coeff = Vector::Zero(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (margins(i) < 1.0) coeff(i) = -C * s(i);
  Vector g(d + 1);
  g.head(d) = wb.head(d) + x.transpose() * coeff;
  g(d) = coeff.sum();
  return g;
}

// Subgradient descent that only accepts steps which do not raise the objective.
Vector fit_svc_binary(const Eigen::Ref<const Matrix>& x, const Vector& s, const SvcParams& p,
                      std::vector<double>& history) {
  const Eigen::Index dim = x.cols() + 1;
  Vector w = Vector::Zero(dim);
  double f = svc_objective(x, s, p.C, w);
  history.push_back(f);
  double step = 1.0 / std::max(1.0, p.C * static_cast<double>(x.rows()));
  int stalled = 0;
  for (int epoch = 0; epoch < p.max_epochs; ++epoch) {
    const Vector g = svc_subgradient(x, s, p.C, w);
    if (g.squaredNorm() == 0.0) break;
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Vector candidate = w - step * g;
      const double f_c = svc_objective(x, s, p.C, candidate);
      if (f_c <= f) {
        stalled = f - f_c <= 1e-10 * std::max(1.0, std::abs(f)) ? stalled + 1 : 0;
        w = std::move(candidate);
        f = f_c;
        step *= 1.2;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    history.push_back(f);
    if (stalled >= 10) break;
  }
  return w;
}

Matrix softmax_rows(Matrix z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    z.row(i).array() -= z.row(i).maxCoeff();
    z.row(i) = z.row(i).array().exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

Matrix mlp_forward(const MlpWeights& w, const Eigen::Ref<const Matrix>& x, Matrix* hidden) {
  Matrix h = ((x * w.w1).rowwise() + w.b1.transpose()).cwiseMax(0.0);
  Matrix z = (h * w.w2).rowwise() + w.b2.transpose();
  if (hidden) *hidden = std::move(h);
  return z;
}

void fit_mlp(ClassifierModel& model, const Eigen::Ref<const Matrix>& x, const std::vector<int>& y) {
  const auto& p = model.spec.mlp;
  const Eigen::Index d = x.cols();
  const Eigen::Index h = p.hidden;
  const auto n_classes = static_cast<Eigen::Index>(model.label_set.size());
  Rng rng(derive_seed(model.spec.seed, 0));

  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
    return m;
  };
  MlpWeights& w = model.mlp;
  w.w1 = glorot(d, h);
  w.b1 = Vector::Zero(h);
  w.w2 = glorot(h, n_classes);
  w.b2 = Vector::Zero(n_classes);

  Vector theta = w.flatten();
  Vector m1 = Vector::Zero(theta.size());
  Vector m2 = Vector::Zero(theta.size());
  MlpWeights grad;
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(p.batch_size);

  double best = std::numeric_limits<double>::infinity();
  int no_improvement = 0;
  long step = 0;
  Matrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < p.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      xb.resize(static_cast<Eigen::Index>(end - start), d);
      yb.resize(end - start);
      for (std::size_t r = start; r < end; ++r) {
        xb.row(static_cast<Eigen::Index>(r - start)) = x.row(static_cast<Eigen::Index>(order[r]));
        yb[r - start] = y[order[r]];
      }
      epoch_loss += mlp_loss(w, xb, yb, p.l2, &grad) * static_cast<double>(end - start);

      ++step;
      const Vector g = grad.flatten();
      m1 = p.beta1 * m1 + (1.0 - p.beta1) * g;
      m2 = p.beta2 * m2 + (1.0 - p.beta2) * g.cwiseAbs2();
      const double lr = p.learning_rate * std::sqrt(1.0 - std::pow(p.beta2, step)) /
                        (1.0 - std::pow(p.beta1, step));
      theta.array() -= lr * m1.array() / (m2.array().sqrt() + p.epsilon);
      w.assign(theta);
    }
    epoch_loss /= static_cast<double>(order.size());
    model.loss_history.push_back(epoch_loss);
    model.epochs_run = epoch + 1;
    if (epoch_loss > best - p.tol) {
      if (++no_improvement >= p.patience) break;
    } else {
      no_improvement = 0;
    }
    best = std::min(best, epoch_loss);
  }
}

std::vector<double> unit_weights(Eigen::Index n) { return std::vector<double>(static_cast<std::size_t>(n), 1.0); }

int forest_features(const ForestParams& p, Eigen::Index d) {
  if (p.max_features < 0) return static_cast<int>(d);
  if (p.max_features == 0) return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(d)))));
  return p.max_features;
}

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != m.size())
    throw Error(ErrorCode::io_error, "matrix payload size mismatch");
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

json spec_to_json(const ClassifierSpec& s) {
  return {
      {"algo", to_string(s.algo)},
      {"seed", s.seed},
      {"logreg", {{"C", s.logreg.C}, {"max_epochs", s.logreg.max_epochs}, {"tol", s.logreg.tol}}},
      {"svc", {{"C", s.svc.C}, {"max_epochs", s.svc.max_epochs}}},
      {"knn", {{"k", s.knn.k}}},
      {"mlp",
       {{"hidden", s.mlp.hidden}, {"learning_rate", s.mlp.learning_rate}, {"beta1", s.mlp.beta1},
        {"beta2", s.mlp.beta2}, {"epsilon", s.mlp.epsilon}, {"batch_size", s.mlp.batch_size},
        {"max_epochs", s.mlp.max_epochs}, {"tol", s.mlp.tol}, {"patience", s.mlp.patience},
        {"l2", s.mlp.l2}}},
      {"tree", {{"max_depth", s.tree.max_depth}, {"min_samples_split", s.tree.min_samples_split}}},
      {"forest",
       {{"n_trees", s.forest.n_trees}, {"bootstrap", s.forest.bootstrap},
        {"max_features", s.forest.max_features}, {"max_depth", s.forest.tree.max_depth},
        {"min_samples_split", s.forest.tree.min_samples_split}}},
  };
}

ClassifierSpec spec_from_json(const json& j) {
  ClassifierSpec s;
  s.algo = parse_classifier_algo(j.at("algo").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& lr = j.at("logreg");
  s.logreg = {lr.at("C").get<double>(), lr.at("max_epochs").get<int>(), lr.at("tol").get<double>()};
  const auto& sv = j.at("svc");
  s.svc = {sv.at("C").get<double>(), sv.at("max_epochs").get<int>()};
  s.knn.k = j.at("knn").at("k").get<int>();
  const auto& m = j.at("mlp");
  s.mlp.hidden = m.at("hidden").get<int>();
  s.mlp.learning_rate = m.at("learning_rate").get<double>();
  s.mlp.beta1 = m.at("beta1").get<double>();
  s.mlp.beta2 = m.at("beta2").get<double>();
  s.mlp.epsilon = m.at("epsilon").get<double>();
  s.mlp.batch_size = m.at("batch_size").get<int>();
  s.mlp.max_epochs = m.at("max_epochs").get<int>();
  s.mlp.tol = m.at("tol").get<double>();
  s.mlp.patience = m.at("patience").get<int>();
  s.mlp.l2 = m.at("l2").get<double>();
  s.tree.max_depth = j.at("tree").at("max_depth").get<int>();
  s.tree.min_samples_split = j.at("tree").at("min_samples_split").get<int>();
  const auto& f = j.at("forest");
  s.forest.n_trees = f.at("n_trees").get<int>();
  s.forest.bootstrap = f.at("bootstrap").get<bool>();
  s.forest.max_features = f.at("max_features").get<int>();
  s.forest.tree.max_depth = f.at("max_depth").get<int>();
  s.forest.tree.min_samples_split = f.at("min_samples_split").get<int>();
  return s;
}

}  // namespace

std::string_view to_string(ClassifierAlgo algo) {
  switch (algo) {
    case ClassifierAlgo::logreg: return "logreg";
    case ClassifierAlgo::linear_svc: return "linear_svc";
    case ClassifierAlgo::knn: return "knn";
    case ClassifierAlgo::mlp: return "mlp";
    case ClassifierAlgo::dectree: return "dectree";
    case ClassifierAlgo::randforest: return "randforest";
  }
  return "logreg";
}

std::string_view display_name(ClassifierAlgo algo) {
  switch (algo) {
    case ClassifierAlgo::logreg: return "LogReg";
    case ClassifierAlgo::linear_svc: return "LinSVC";
    case ClassifierAlgo::knn: return "kNN";
    case ClassifierAlgo::mlp: return "MLP";
    case ClassifierAlgo::dectree: return "DecTree";
    case ClassifierAlgo::randforest: return "RandForest";
  }
  return "LogReg";
}

ClassifierAlgo parse_classifier_algo(std::string_view name) {
  for (auto algo : {ClassifierAlgo::logreg, ClassifierAlgo::linear_svc, ClassifierAlgo::knn,
                    ClassifierAlgo::mlp, ClassifierAlgo::dectree, ClassifierAlgo::randforest})
    if (name == to_string(algo)) return algo;
  throw Error(ErrorCode::invalid_argument, "unknown classifier '" + std::string(name) + "'");
}

void ClassifierSpec::validate() const {
  require(logreg.C > 0 && logreg.max_epochs >= 1 && logreg.tol > 0, "logreg parameters out of range");
  require(svc.C > 0 && svc.max_epochs >= 1, "linear_svc parameters out of range");
  require(knn.k >= 1, "knn.k must be at least 1");
  require(mlp.hidden >= 1 && mlp.batch_size >= 1 && mlp.max_epochs >= 1 && mlp.learning_rate > 0 &&
              mlp.beta1 >= 0 && mlp.beta1 < 1 && mlp.beta2 >= 0 && mlp.beta2 < 1 && mlp.l2 >= 0 &&
              mlp.patience >= 1,
          "mlp parameters out of range");
  require(tree.max_depth >= 0 && tree.min_samples_split >= 2, "tree parameters out of range");
  require(forest.n_trees >= 1 && forest.tree.max_depth >= 0 && forest.tree.min_samples_split >= 2,
          "forest parameters out of range");
}

double logreg_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& s,
                        double C, const Eigen::Ref<const Vector>& wb, Vector* gradient) {
  const Eigen::Index d = x.cols();
  const Vector margins = s.array() * ((x * wb.head(d)).array() + wb(d));
  double value = 0.5 * wb.head(d).squaredNorm();
  Vector coeff(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    value += C * logistic_loss(margins(i));
    coeff(i) = -C * s(i) * sigmoid(-margins(i));
  }
  if (gradient) {
    gradient->resize(d + 1);
    gradient->head(d) = wb.head(d) + x.transpose() * coeff;
    (*gradient)(d) = coeff.sum();
  }
  return value;
}

double svc_objective(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& s, double C,
                     const Eigen::Ref<const Vector>& wb) {
  const Eigen::Index d = x.cols();
  const Vector scores = (x * wb.head(d)).array() + wb(d);
  return 0.5 * wb.head(d).squaredNorm() +
         C * (1.0 - s.array() * scores.array()).cwiseMax(0.0).sum();
}

Vector MlpWeights::flatten() const {
  Vector out(size());
  Eigen::Index o = 0;
  for (const auto* block : {&w1, &w2}) {
    out.segment(o, block->size()) = Eigen::Map<const Vector>(block->data(), block->size());
    o += block->size();
  }
  for (const auto* v : {&b1, &b2}) {
    out.segment(o, v->size()) = *v;
    o += v->size();
  }
  return out;
}

void MlpWeights::assign(const Eigen::Ref<const Vector>& flat) {
  Eigen::Index o = 0;
  for (auto* block : {&w1, &w2}) {
    Eigen::Map<Vector>(block->data(), block->size()) = flat.segment(o, block->size());
    o += block->size();
  }
  for (auto* v : {&b1, &b2}) {
    *v = flat.segment(o, v->size());
    o += v->size();
  }
}

double mlp_loss(const MlpWeights& w, const Eigen::Ref<const Matrix>& x, const std::vector<int>& y,
                double l2, MlpWeights* gradient) {
  const auto n = static_cast<double>(x.rows());
  Matrix hidden;
  const Matrix probs = softmax_rows(mlp_forward(w, x, &hidden));
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    loss -= std::log(std::max(probs(i, y[static_cast<std::size_t>(i)]), 1e-300));
  loss /= n;
  loss += 0.5 * l2 / n * (w.w1.squaredNorm() + w.w2.squaredNorm());
  if (gradient) {
    Matrix dz = probs;
    for (Eigen::Index i = 0; i < x.rows(); ++i) dz(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    dz /= n;
    gradient->w2 = hidden.transpose() * dz + (l2 / n) * w.w2;
    gradient->b2 = dz.colwise().sum().transpose();
    Matrix dh = (dz * w.w2.transpose()).cwiseProduct((hidden.array() > 0.0).cast<double>().matrix());
    gradient->w1 = x.transpose() * dh + (l2 / n) * w.w1;
    gradient->b1 = dh.colwise().sum().transpose();
  }
  return loss;
}

ClassifierModel fit_classifier(const ClassifierSpec& spec, const EncodedMatrix& x,
                               const std::vector<std::string>& y) {
  std::vector<std::string> label_set;
  for (const auto& label : y)
    if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) label_set.push_back(label);
  return fit_classifier(spec, x.features, y, label_set);
}

ClassifierModel fit_classifier(const ClassifierSpec& spec, const Eigen::Ref<const Matrix>& x,
                               const std::vector<std::string>& y,
                               const std::vector<std::string>& label_set) {
  spec.validate();
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    throw Error(ErrorCode::dimension_mismatch, std::to_string(x.rows()) + " rows but " +
                                                   std::to_string(y.size()) + " labels");
  if (!x.allFinite()) throw Error(ErrorCode::invalid_argument, "training matrix has non-finite entries");

  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < label_set.size(); ++i) index.emplace(label_set[i], static_cast<int>(i));
  std::vector<int> yi;
  yi.reserve(y.size());
  std::vector<int> seen(label_set.size(), 0);
  for (const auto& label : y) {
    const auto it = index.find(label);
    if (it == index.end()) throw Error(ErrorCode::unknown_label, "label '" + label + "' not in label set");
    yi.push_back(it->second);
    seen[static_cast<std::size_t>(it->second)] = 1;
  }
  if (y.size() < 2 || std::accumulate(seen.begin(), seen.end(), 0) < 2)
    throw Error(ErrorCode::single_class_training, "training data needs at least two distinct labels");

  ClassifierModel model;
  model.spec = spec;
  model.label_set = label_set;
  model.n_features = x.cols();
  const auto n_classes = static_cast<Eigen::Index>(label_set.size());

  switch (spec.algo) {
    case ClassifierAlgo::logreg:
    case ClassifierAlgo::linear_svc: {
      model.weights = Matrix::Zero(n_classes, x.cols());
      model.intercepts = Vector::Zero(n_classes);
      for (Eigen::Index c = 0; c < n_classes; ++c) {
        Vector s(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) s(i) = yi[static_cast<std::size_t>(i)] == c ? 1.0 : -1.0;
        Vector wb;
        if (spec.algo == ClassifierAlgo::logreg) {
          int epochs = 0;
          wb = fit_logreg_binary(x, s, spec.logreg, epochs);
          model.epochs_run = std::max(model.epochs_run, epochs);
        } else {
          model.objective_history.emplace_back();
          wb = fit_svc_binary(x, s, spec.svc, model.objective_history.back());
          model.epochs_run = std::max(model.epochs_run,
                                      static_cast<int>(model.objective_history.back().size()) - 1);
        }
        model.weights.row(c) = wb.head(x.cols()).transpose();
        model.intercepts(c) = wb(x.cols());
      }
      break;
    }
    case ClassifierAlgo::knn:
      model.train_x = x;
      model.train_y = yi;
      break;
    case ClassifierAlgo::mlp:
      fit_mlp(model, x, yi);
      break;
    case ClassifierAlgo::dectree: {
      detail::TreeBuildOptions options{spec.tree.max_depth, spec.tree.min_samples_split, -1};
      model.trees.push_back(detail::build_tree(x, yi, static_cast<int>(n_classes), unit_weights(x.rows()),
                                               options, derive_seed(spec.seed, 0)));
      break;
    }
    case ClassifierAlgo::randforest: {
      const auto& p = spec.forest;
      detail::TreeBuildOptions options{p.tree.max_depth, p.tree.min_samples_split,
                                       forest_features(p, x.cols())};
      for (int t = 0; t < p.n_trees; ++t) {
        std::vector<double> weight;
        if (p.bootstrap) {
          weight.assign(static_cast<std::size_t>(x.rows()), 0.0);
          Rng rng(derive_seed(spec.seed, 1000003ULL + static_cast<std::uint64_t>(t)));
          for (Eigen::Index i = 0; i < x.rows(); ++i) weight[rng.index(static_cast<std::size_t>(x.rows()))] += 1.0;
        } else {
          weight = unit_weights(x.rows());
        }
        // Tree 0 uses the same stream as a lone decision tree.
        model.trees.push_back(detail::build_tree(x, yi, static_cast<int>(n_classes), weight, options,
                                                 derive_seed(spec.seed, static_cast<std::uint64_t>(t))));
      }
      break;
    }
  }
  return model;
}

Matrix class_scores(const ClassifierModel& model, const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != model.n_features)
    throw Error(ErrorCode::dimension_mismatch, "model expects " + std::to_string(model.n_features) +
                                                   " features, got " + std::to_string(x.cols()));
  const auto n_classes = static_cast<Eigen::Index>(model.label_set.size());
  switch (model.spec.algo) {
    case ClassifierAlgo::logreg: {
      Matrix z = (x * model.weights.transpose()).rowwise() + model.intercepts.transpose();
      Matrix p = z.unaryExpr([](double v) { return sigmoid(v); });
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double sum = p.row(i).sum();
        if (sum > 0) p.row(i) /= sum;
      }
      return p;
    }
    case ClassifierAlgo::linear_svc:
      return (x * model.weights.transpose()).rowwise() + model.intercepts.transpose();
    case ClassifierAlgo::knn: {
      const Matrix d2 = squared_distances(x, model.train_x);
      const auto n_train = static_cast<std::size_t>(model.train_x.rows());
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(model.spec.knn.k), n_train);
      Matrix votes = Matrix::Zero(x.rows(), n_classes);
      std::vector<std::size_t> idx(n_train);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                          [&](std::size_t a, std::size_t b) {
                            const double da = d2(i, static_cast<Eigen::Index>(a));
                            const double db = d2(i, static_cast<Eigen::Index>(b));
                            return da < db || (da == db && a < b);
                          });
        for (std::size_t r = 0; r < k; ++r) votes(i, model.train_y[idx[r]]) += 1.0;
      }
      return votes / static_cast<double>(k);
    }
    case ClassifierAlgo::mlp:
      return softmax_rows(mlp_forward(model.mlp, x, nullptr));
    case ClassifierAlgo::dectree:
    case ClassifierAlgo::randforest: {
      Matrix out = Matrix::Zero(x.rows(), n_classes);
      for (const auto& tree : model.trees)
        for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) += tree.leaf_distribution(x.row(i)).transpose();
      return out / static_cast<double>(model.trees.size());
    }
  }
  return {};
}

std::vector<std::string> predict(const ClassifierModel& model, const EncodedMatrix& x) {
  return predict(model, x.features);
}

std::vector<std::string> predict(const ClassifierModel& model, const Eigen::Ref<const Matrix>& x) {
  const Matrix scores = class_scores(model, x);
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out.push_back(model.label_set[static_cast<std::size_t>(best)]);
  }
  return out;
}

std::vector<std::vector<std::string>> predict_ranked(const ClassifierModel& model,
                                                     const Eigen::Ref<const Matrix>& x, int k) {
  if (k < 1 || k > static_cast<int>(model.label_set.size()))
    throw Error(ErrorCode::k_too_large, "k=" + std::to_string(k) + " outside [1, " +
                                            std::to_string(model.label_set.size()) + "]");
  const Matrix scores = class_scores(model, x);
  std::vector<std::vector<std::string>> out;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.cols()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(i, a) > scores(i, b); });
    auto& row = out.emplace_back();
    for (int r = 0; r < k; ++r) row.push_back(model.label_set[static_cast<std::size_t>(order[r])]);
  }
  return out;
}

void save_classifier(const ClassifierModel& model, const std::filesystem::path& path) {
  json j;
  j["format"] = "mathenc-classifier";
  j["version"] = kModelFormatVersion;
  j["spec"] = spec_to_json(model.spec);
  j["label_set"] = model.label_set;
  j["n_features"] = model.n_features;
  j["epochs_run"] = model.epochs_run;
  switch (model.spec.algo) {
    case ClassifierAlgo::logreg:
    case ClassifierAlgo::linear_svc:
      j["weights"] = matrix_to_json(model.weights);
      j["intercepts"] = vector_to_json(model.intercepts);
      j["objective_history"] = model.objective_history;
      break;
    case ClassifierAlgo::knn:
      j["train_x"] = matrix_to_json(model.train_x);
      j["train_y"] = model.train_y;
      break;
    case ClassifierAlgo::mlp:
      j["w1"] = matrix_to_json(model.mlp.w1);
      j["b1"] = vector_to_json(model.mlp.b1);
      j["w2"] = matrix_to_json(model.mlp.w2);
      j["b2"] = vector_to_json(model.mlp.b2);
      j["loss_history"] = model.loss_history;
      break;
    case ClassifierAlgo::dectree:
    case ClassifierAlgo::randforest: {
      json trees = json::array();
      for (const auto& tree : model.trees) {
        json nodes = json::array();
        for (const auto& n : tree.nodes)
          nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                           {"right", n.right}, {"distribution", vector_to_json(n.distribution)}});
        trees.push_back(std::move(nodes));
      }
      j["trees"] = std::move(trees);
      break;
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << j.dump() << '\n';
}

ClassifierModel load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, path.string());
  json j;
  try {
    j = json::parse(in);
    if (j.at("format") != "mathenc-classifier" || j.at("version").get<int>() != kModelFormatVersion)
      throw Error(ErrorCode::io_error, path.string() + ": unsupported model container");

    ClassifierModel model;
    model.spec = spec_from_json(j.at("spec"));
    model.label_set = j.at("label_set").get<std::vector<std::string>>();
    model.n_features = j.at("n_features").get<Eigen::Index>();
    model.epochs_run = j.at("epochs_run").get<int>();
    switch (model.spec.algo) {
      case ClassifierAlgo::logreg:
      case ClassifierAlgo::linear_svc:
        model.weights = matrix_from_json(j.at("weights"));
        model.intercepts = vector_from_json(j.at("intercepts"));
        model.objective_history = j.at("objective_history").get<std::vector<std::vector<double>>>();
        break;
      case ClassifierAlgo::knn:
        model.train_x = matrix_from_json(j.at("train_x"));
        model.train_y = j.at("train_y").get<std::vector<int>>();
        break;
      case ClassifierAlgo::mlp:
        model.mlp.w1 = matrix_from_json(j.at("w1"));
        model.mlp.b1 = vector_from_json(j.at("b1"));
        model.mlp.w2 = matrix_from_json(j.at("w2"));
        model.mlp.b2 = vector_from_json(j.at("b2"));
        model.loss_history = j.at("loss_history").get<std::vector<double>>();
        break;
      case ClassifierAlgo::dectree:
      case ClassifierAlgo::randforest:
        for (const auto& nodes : j.at("trees")) {
          auto& tree = model.trees.emplace_back();
          for (const auto& n : nodes)
            tree.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                                  n.at("left").get<int>(), n.at("right").get<int>(),
                                  vector_from_json(n.at("distribution"))});
        }
        break;
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::io_error, path.string() + ": " + e.what());
  }
}

}  // namespace mathenc
