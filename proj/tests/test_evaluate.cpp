#include "mathenc/error.hpp"
#include "mathenc/evaluate.hpp"
#include "mathenc/experiment.hpp"
#include "mathenc/random.hpp"

#include "support.hpp"

#include <doctest.h>

#include <chrono>
#include <map>
#include <set>
#include <thread>

using namespace mathenc;

namespace {

// Majority fraction per cluster by explicit counting, then averaged.
double brute_force_purity(const std::vector<int>& clusters, const std::vector<std::string>& labels,
                          bool weighted) {
  std::set<int> ids(clusters.begin(), clusters.end());
  double sum = 0, majority_total = 0;
  for (int c : ids) {
    std::size_t size = 0, best = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (clusters[i] != c) continue;
      ++size;
      std::size_t same = 0;
      for (std::size_t j = 0; j < clusters.size(); ++j) same += clusters[j] == c && labels[j] == labels[i];
      best = std::max(best, same);
    }
    sum += static_cast<double>(best) / static_cast<double>(size);
    majority_total += static_cast<double>(best);
  }
  return weighted ? majority_total / static_cast<double>(clusters.size()) : sum / static_cast<double>(ids.size());
}

EncodedMatrix encoded(const Matrix& x) {
  EncodedMatrix m;
  m.features = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) m.sample_ids.push_back(std::to_string(i));
  return m;
}

}  // namespace

TEST_CASE("fold plan examples") {
  const FoldPlan ten = make_folds(10, 10, 1);
  for (int f = 0; f < 10; ++f) CHECK(ten.test_indices(f).size() == 1);
  const FoldPlan three = make_folds(10, 3, 1);
  std::multiset<std::size_t> sizes;
  for (int f = 0; f < 3; ++f) sizes.insert(three.test_indices(f).size());
  CHECK(sizes == std::multiset<std::size_t>{3, 3, 4});
  CHECK(three.test_indices(0).size() == 4);
  CHECK(make_folds(10, 3, 1).assignments == three.assignments);
  CHECK(make_folds(10, 3, 2).assignments != three.assignments);
  CHECK_THROWS_AS(make_folds(3, 4, 0), Error);
  CHECK_THROWS_AS(make_folds(3, 1, 0), Error);
}

TEST_CASE("fold plan invariants") {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(200);
    const int k = 2 + static_cast<int>(rng.index(n - 1));
    const FoldPlan p = make_folds(n, k, rng.next());
    std::vector<int> seen(n, 0);
    std::size_t lo = n, hi = 0;
    for (int f = 0; f < k; ++f) {
      const auto test = p.test_indices(f);
      const auto train = p.train_indices(f);
      CHECK(test.size() + train.size() == n);
      lo = std::min(lo, test.size());
      hi = std::max(hi, test.size());
      for (auto i : test) ++seen[i];
    }
    CHECK(hi - lo <= 1);
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST_CASE("confusion matrix") {
  ConfusionMatrix cm({"a", "b", "c"});
  cm.add({"a", "a", "b", "c", "c"}, {"a", "b", "b", "c", "a"});
  CHECK(cm.total() == 5);
  CHECK(cm.counts(0, 1) == 1);
  CHECK(cm.counts.trace() == 3);
  CHECK(cm.accuracy() == doctest::Approx(0.6));
  CHECK(accuracy({"a", "a", "b", "c", "c"}, {"a", "b", "b", "c", "a"}) == cm.accuracy());
  const Matrix pct = cm.row_percentages();
  CHECK(pct(0, 0) == 50.0);
  CHECK(pct(1, 1) == 100.0);
  CHECK(confusion_csv(cm) == "true/predicted,a,b,c\na,1,1,0\nb,0,1,0\nc,1,0,1\n");
  CHECK_THROWS_AS(accuracy({"a"}, {"a", "b"}), Error);
}

TEST_CASE("purity examples") {
  CHECK(purity({0, 0, 0, 1, 1}, {"A", "A", "B", "B", "B"}) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(purity({0, 0, 1, 1}, {"x", "x", "y", "y"}) == 1.0);
  std::vector<int> one(14 * 10, 0);
  std::vector<std::string> labels;
  for (int i = 0; i < 140; ++i) labels.push_back("c" + std::to_string(i % 14));
  CHECK(std::abs(purity(one, labels) - 1.0 / 14.0) < 1e-12);
  std::vector<int> singletons(140);
  for (int i = 0; i < 140; ++i) singletons[static_cast<std::size_t>(i)] = i;
  CHECK(purity(singletons, labels) == 1.0);
  CHECK(weighted_purity({0, 0, 0, 1, 1}, {"A", "A", "B", "B", "B"}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(purity({0, 1}, {"a"}), Error);
}

TEST_CASE("purity equals brute force and is permutation invariant") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(20);
    const std::size_t k = 1 + rng.index(n);
    std::vector<int> clusters;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
      clusters.push_back(static_cast<int>(rng.index(k)));
      labels.push_back(std::string(1, static_cast<char>('a' + rng.index(4))));
    }
    CHECK(purity(clusters, labels) == brute_force_purity(clusters, labels, false));
    CHECK(weighted_purity(clusters, labels) == brute_force_purity(clusters, labels, true));
    std::vector<int> relabelled = clusters;
    for (auto& c : relabelled) c = 100 - 3 * c;
    std::vector<std::string> renamed = labels;
    for (auto& l : renamed) l = "class_" + l;
    CHECK(purity(relabelled, renamed) == doctest::Approx(purity(clusters, labels)).epsilon(1e-15));
  }
}

TEST_CASE("macro purity grows towards one with more singletons") {
  std::vector<std::string> labels;
  for (int i = 0; i < 60; ++i) labels.push_back("c" + std::to_string(i % 6));
  double previous = 0;
  for (int singles = 0; singles <= 60; singles += 10) {
    std::vector<int> clusters(60, 0);
    for (int i = 0; i < singles; ++i) clusters[static_cast<std::size_t>(i)] = i + 1;
    const double p = purity(clusters, labels);
    CHECK(p >= previous);
    previous = p;
  }
  CHECK(previous == 1.0);
}

TEST_CASE("cosine similarity") {
  Vector u(2), v(2), w(2), z = Vector::Zero(2);
  u << 1, 0;
  v << 1, 1;
  w << 0, 3;
  CHECK(cosine_similarity(v, v) == doctest::Approx(1.0));
  CHECK(cosine_similarity(u, w) == 0.0);
  CHECK(cosine_similarity(u, v) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cosine_similarity(u, z) == 0.0);
}

TEST_CASE("pearson") {
  CHECK(std::abs(pearson({1, 2, 3}, {1, 2, 2}) - std::sqrt(3.0) / 2.0) < 1e-9);
  CHECK(pearson({1, 2, 3, 5}, {2, 4, 6, 10}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson({1, 2, 3, 5}, {-1, -2, -3, -5}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), Error);
}

TEST_CASE("text math correlation") {
  Rng rng(3);
  Matrix a(30, 6);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
  CHECK(std::abs(text_math_correlation(encoded(a), encoded(a)) - 1.0) < 1e-9);
  Matrix scaled = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) scaled.row(i) *= 0.1 + rng.uniform() * 9;
  CHECK(std::abs(text_math_correlation(encoded(a), encoded(scaled)) - 1.0) < 1e-9);
  Matrix b(30, 4);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  CHECK(text_math_correlation(encoded(a), encoded(b)) ==
        doctest::Approx(text_math_correlation(encoded(b), encoded(a))).epsilon(1e-12));
  CHECK_THROWS_AS(text_math_correlation(encoded(a), encoded(Matrix::Ones(30, 2))), Error);
  CHECK_THROWS_AS(text_math_correlation(encoded(a.topRows(2)), encoded(b.topRows(2))), Error);
  EncodedMatrix other = encoded(b);
  other.sample_ids[0] = "different";
  CHECK_THROWS_AS(text_math_correlation(encoded(a), other), Error);
}

TEST_CASE("runtimes") {
  CHECK(relative_runtimes({2.0}) == std::vector<double>{100.0});
  const auto r = relative_runtimes({0.3, 0.1, 0.7});
  CHECK(r[2] == 100.0);
  CHECK(r[1] < r[0]);
  const auto timed = measure_runtime({{"fast", [] { std::this_thread::sleep_for(std::chrono::milliseconds(40)); }},
                                      {"slow", [] { std::this_thread::sleep_for(std::chrono::milliseconds(80)); }}});
  CHECK(timed[1].second == 100.0);
  CHECK(timed[0].second == doctest::Approx(50.0).epsilon(0.1));
}

TEST_CASE("report arithmetic") {
  const EvaluationReport one = build_report({"r"}, {"c"}, {{42.0}});
  CHECK(*one.row_means[0] == 42.0);
  CHECK(*one.overall_max == 42.0);

  const EvaluationReport r = build_report({"r0", "r1"}, {"c0", "c1"}, {{10.0, 20.0}, {30.0, 40.0}}, {1.0, 4.0});
  CHECK(*r.row_means[0] == 15.0);
  CHECK(*r.row_means[1] == 35.0);
  CHECK(*r.column_means[0] == 20.0);
  CHECK(*r.column_means[1] == 30.0);
  CHECK(*r.overall_max == 40.0);
  CHECK(r.runtimes_percent == std::vector<double>{25.0, 100.0});
  CHECK(*r.best_row_mean == 1);
  CHECK(*r.fastest_column == 0);
  CHECK_THROWS_AS(build_report({"r0", "r1"}, {"c0", "c1"}, {{1.0, 2.0}, {3.0}}), Error);
}

TEST_CASE("report means are consistent on random grids with holes") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nr = 1 + rng.index(5), nc = 1 + rng.index(5);
    std::vector<std::vector<std::optional<double>>> cells(nr, std::vector<std::optional<double>>(nc));
    for (auto& row : cells)
      for (auto& c : row)
        if (rng.uniform() < 0.8) c = rng.uniform(0, 100);
    std::vector<std::string> rows(nr, "r"), cols(nc, "c");
    const EvaluationReport r = build_report(rows, cols, cells);
    for (std::size_t i = 0; i < nr; ++i) {
      double s = 0;
      int n = 0;
      for (const auto& c : cells[i])
        if (c) s += *c, ++n;
      if (n)
        CHECK(std::abs(*r.row_means[i] - s / n) < 1e-9);
      else
        CHECK_FALSE(r.row_means[i].has_value());
    }
  }
}

TEST_CASE("report rendering") {
  const EvaluationReport r = build_report({"docText_tfidf", "docMath_op_tfidf"}, {"LogReg", "kNN"},
                                          {{80.0, 70.0}, {std::nullopt, 40.0}}, {2.0, 1.0});
  const std::string csv = report_csv(r);
  CHECK(csv.rfind("Encoding/Classifier,LogReg,kNN,Mean,Max\n", 0) == 0);
  CHECK(csv.find("docMath_op_tfidf,,40.000000,40.000000,40.000000\n") != std::string::npos);
  CHECK(csv.find("Mean,80.000000,55.000000") != std::string::npos);
  CHECK(csv.find("Runtime") == std::string::npos);
  const std::string md = report_markdown(r, "Accuracy");
  CHECK(md.find("| **Mean** |") != std::string::npos);
  CHECK(md.find("| **Max** |") != std::string::npos);
  CHECK(md.find("| **Runtime [%]** | 100.0 | `50.0` |") != std::string::npos);
  CHECK(md.find("**75.0**") != std::string::npos);
}

TEST_CASE("cross validation on separable and shuffled corpora") {
  SyntheticOptions o;
  o.n_classes = 4;
  o.docs_per_class = 20;
  o.seed = 5;
  const Corpus corpus = generate_synthetic_corpus(o);
  ClassifierSpec logreg;
  const FoldPlan plan = make_folds(corpus.documents.size(), 5, 1);
  const auto cv = cross_validate(logreg, parse_encoding_spec("text_tfidf"), corpus, plan);
  CHECK(cv.mean_accuracy >= 0.95);
  CHECK(cv.confusion.total() == 80);
  CHECK(cv.fold_accuracies.size() == 5);
  double mean = 0;
  for (double a : cv.fold_accuracies) mean += a / 5;
  CHECK(cv.mean_accuracy == doctest::Approx(mean).epsilon(1e-15));

  Corpus shuffled = corpus;
  Rng rng(6);
  std::vector<SubjectClass> labels = shuffled.labels();
  rng.shuffle(labels);
  for (std::size_t i = 0; i < labels.size(); ++i) shuffled.documents[i].label = labels[i];
  const auto chance = cross_validate(logreg, parse_encoding_spec("text_tfidf"), shuffled, plan);
  const double p = 0.25, sigma = std::sqrt(p * (1 - p) / 80.0);
  CHECK(std::abs(chance.mean_accuracy - p) <= 3 * sigma);
}

TEST_CASE("duplicated data with 1-nn is perfect") {
  SyntheticOptions o;
  o.n_classes = 3;
  o.docs_per_class = 10;
  o.seed = 6;
  Corpus corpus = generate_synthetic_corpus(o);
  const auto originals = corpus.documents;
  for (auto d : originals) {
    d.id += "-copy";
    corpus.documents.push_back(d);
  }
  ClassifierSpec knn;
  knn.algo = ClassifierAlgo::knn;
  knn.knn.k = 1;
  // Two folds split by original/copy.
  FoldPlan plan;
  plan.n_samples = corpus.documents.size();
  plan.n_folds = 2;
  for (std::size_t i = 0; i < plan.n_samples; ++i) plan.assignments.push_back(i < originals.size() ? 0 : 1);
  const auto cv = cross_validate(knn, parse_encoding_spec("math_opid_tfidf"), corpus, plan);
  CHECK(cv.mean_accuracy == 1.0);
}
