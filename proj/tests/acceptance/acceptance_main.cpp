// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "mathenc/classify.hpp"
#include "mathenc/cluster.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/error.hpp"
#include "mathenc/evaluate.hpp"
#include "mathenc/experiment.hpp"
#include "mathenc/random.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace mathenc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mathenc_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 ------------------------------------------------------------------------

Matrix naive_tfidf(const std::vector<TokenStream>& bags) {
  std::set<std::string> vocab;
  for (const auto& b : bags) vocab.insert(b.begin(), b.end());
  const std::vector<std::string> cols(vocab.begin(), vocab.end());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(bags.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double df = 0;
    for (const auto& b : bags) df += std::count(b.begin(), b.end(), cols[c]) > 0;
    const double idf = std::log((1.0 + static_cast<double>(bags.size())) / (1.0 + df)) + 1.0;
    for (std::size_t r = 0; r < bags.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<double>(std::count(bags[r].begin(), bags[r].end(), cols[c])) * idf;
  }
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double ss = 0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) ss += out(r, c) * out(r, c);
    if (ss > 0) out.row(r) /= std::sqrt(ss);
  }
  return out;
}

Outcome tfidf_oracle() {
  Outcome o;
  const TfidfModel m = fit_tfidf({{"alpha", "beta", "alpha"}, {"alpha", "gamma"}});
  const Matrix x = transform_tfidf(m, {{"alpha", "beta", "alpha"}});
  // Closed form of the fixture: raw (2, idf) with idf = ln(1.5) + 1, then unit norm.
  const double idf = std::log(1.5) + 1.0, norm = std::sqrt(4.0 + idf * idf);
  const double e1 = std::abs(x(0, 0) - 2.0 / norm), e2 = std::abs(x(0, 1) - idf / norm);
  const double printed = std::max(std::abs(x(0, 0) - 0.818182), std::abs(x(0, 1) - 0.574963));
  o.pass = e1 < 1e-12 && e2 < 1e-12 && printed < 1e-5;
  Rng rng(1);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g"};
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TokenStream> bags(1 + rng.index(10));
    for (auto& b : bags)
      for (std::size_t t = rng.index(11); t > 0; --t) b.push_back(pool[rng.index(pool.size())]);
    bags[0].push_back(pool[rng.index(pool.size())]);
    const Matrix got = transform_tfidf(fit_tfidf(bags), bags);
    const Matrix want = naive_tfidf(bags);
    if (got.rows() != want.rows() || got.cols() != want.cols() || got != want) ++mismatches;
  }
  o.pass = o.pass && mismatches == 0;
  o.detail = "fixture (" + fmt("%.7f", x(0, 0)) + ", " + fmt("%.7f", x(0, 1)) + ") equals the closed form, " +
             fmt("%.1e", printed) + " from the rounded 0.818182/0.574963, " +
             std::to_string(mismatches) + "/500 random corpora differ from the naive reference";
  return o;
}

// 2 ------------------------------------------------------------------------

double brute_purity(const std::vector<int>& clusters, const std::vector<std::string>& labels) {
  std::map<int, std::map<std::string, int>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][labels[i]];
  double sum = 0;
  for (const auto& [c, counts] : table) {
    int best = 0, size = 0;
    for (const auto& [l, n] : counts) {
      best = std::max(best, n);
      size += n;
    }
    sum += static_cast<double>(best) / size;
  }
  return sum / static_cast<double>(table.size());
}

Outcome purity_oracle() {
  Outcome o;
  Rng rng(2);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(20);
    std::vector<int> c;
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i) {
      c.push_back(static_cast<int>(rng.index(1 + rng.index(n))));
      l.push_back(std::string(1, static_cast<char>('a' + rng.index(5))));
    }
    if (purity(c, l) != brute_purity(c, l)) ++mismatches;
  }
  std::vector<std::string> labels;
  std::vector<int> singletons, one;
  for (int i = 0; i < 14 * 50; ++i) {
    labels.push_back("class" + std::to_string(i % 14));
    singletons.push_back(i);
    one.push_back(0);
  }
  const double ps = purity(singletons, labels), p1 = purity(one, labels);
  o.pass = mismatches == 0 && ps == 1.0 && std::abs(p1 - 1.0 / 14.0) <= 1e-12;
  o.detail = std::to_string(mismatches) + "/200 mismatches, singletons " + fmt("%.6f", ps) + ", one cluster " +
             fmt("%.12f", p1);
  return o;
}

// 3 ------------------------------------------------------------------------

double rel_error(const Vector& a, const Vector& n) {
  double worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a(i) - n(i)) / std::max({std::abs(a(i)), std::abs(n(i)), 1e-8}));
  return worst;
}

Outcome gradient_checks() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(3);
  double worst_logreg = 0, worst_mlp = 0;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(9)), d = 1 + static_cast<int>(rng.index(5));
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    Vector s(n), wb(d + 1);
    for (int i = 0; i < n; ++i) s(i) = rng.index(2) ? 1.0 : -1.0;
    for (int i = 0; i <= d; ++i) wb(i) = rng.normal();
    Vector grad, numeric(d + 1);
    logreg_objective(x, s, 1.0, wb, &grad);
    for (int i = 0; i <= d; ++i) {
      Vector p = wb, m = wb;
      p(i) += h;
      m(i) -= h;
      numeric(i) = (logreg_objective(x, s, 1.0, p, nullptr) - logreg_objective(x, s, 1.0, m, nullptr)) / (2 * h);
    }
    worst_logreg = std::max(worst_logreg, rel_error(grad, numeric));

    const int hidden = 2 + static_cast<int>(rng.index(6)), L = 2 + static_cast<int>(rng.index(3));
    std::vector<int> y;
    for (int i = 0; i < n; ++i) y.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(L))));
    MlpWeights w{Matrix(d, hidden), Vector(hidden), Matrix(hidden, L), Vector(L)};
    Vector flat(w.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = rng.normal();
    w.assign(flat);
    MlpWeights g;
    mlp_loss(w, x, y, 0.1, &g);
    Vector num(flat.size());
    for (Eigen::Index i = 0; i < flat.size(); ++i) {
      Vector fp = flat, fm = flat;
      fp(i) += h;
      fm(i) -= h;
      MlpWeights wp = w, wm = w;
      wp.assign(fp);
      wm.assign(fm);
      num(i) = (mlp_loss(wp, x, y, 0.1, nullptr) - mlp_loss(wm, x, y, 0.1, nullptr)) / (2 * h);
    }
    worst_mlp = std::max(worst_mlp, rel_error(g.flatten(), num));
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = worst_logreg < 1e-4 && worst_mlp < 1e-4 && elapsed < 10.0;
  o.detail = "max rel error logreg " + fmt("%.2e", worst_logreg) + ", mlp " + fmt("%.2e", worst_mlp) + ", " +
             fmt("%.2f", elapsed) + " s";
  return o;
}

// 4 ------------------------------------------------------------------------

Outcome clustering_sanity() {
  Outcome o;
  Rng rng(4);
  const int blobs = 14, per = 50, dims = 20;
  Matrix x(blobs * per, dims);
  std::vector<std::string> truth;
  for (int b = 0; b < blobs; ++b)
    for (int p = 0; p < per; ++p) {
      for (int d = 0; d < dims; ++d) x(b * per + p, d) = rng.normal();
      // Centres on distinct axes, pairwise 10 sigma apart.
      x(b * per + p, b) += 10.0 / std::sqrt(2.0);
      truth.push_back("blob" + std::to_string(b));
    }
  EncodedMatrix em;
  em.features = x;
  for (int i = 0; i < blobs * per; ++i) em.sample_ids.push_back(std::to_string(i));
  for (auto algo : {ClusterAlgo::kmeans, ClusterAlgo::agglomerative, ClusterAlgo::gmm}) {
    ClustererSpec s;
    s.algo = algo;
    s.k = blobs;
    s.seed = 4;
    const double p = purity(fit_predict_clusterer(s, em), truth);
    o.pass = o.pass && p >= 0.99;
    o.detail += std::string(to_string(algo)) + " " + fmt("%.4f", p) + ", ";
  }
  Matrix one(60, dims);
  for (Eigen::Index i = 0; i < one.size(); ++i) one.data()[i] = rng.normal();
  const MeanShiftResult ms = mean_shift(one, {});
  const int n_modes = static_cast<int>(ms.modes.rows());
  o.pass = o.pass && n_modes == 1;
  double worst_drop = 0;
  int fits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix data(150, 4);
    Rng r(100 + seed);
    for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = r.normal() + static_cast<double>(i % 3) * 1.5;
    for (const auto& m : {fit_gmm(data, 3, {}, seed), fit_gmm(x, blobs, {}, seed)}) {
      ++fits;
      for (std::size_t i = 1; i < m.loglik_history.size(); ++i)
        worst_drop = std::max(worst_drop, m.loglik_history[i - 1] - m.loglik_history[i]);
    }
  }
  o.pass = o.pass && worst_drop <= 1e-8;
  o.detail += "meanshift modes " + std::to_string(n_modes) + ", largest EM log-likelihood drop " +
              fmt("%.1e", worst_drop) + " over " + std::to_string(fits) + " fits";
  return o;
}

// 5 and 6 --------------------------------------------------------------------

SyntheticOptions shared_identifier_options() {
  SyntheticOptions s;
  s.n_classes = 14;
  s.docs_per_class = 50;
  s.seed = 2024;
  return s;
}

double cv_accuracy(const Corpus& corpus, const std::string& encoding, const StreamOptions& opts = {}) {
  ClassifierSpec logreg;
  logreg.seed = 5;
  EncodingSpec spec = parse_encoding_spec(encoding);
  spec.embedding.seed = 5;
  return cross_validate(logreg, spec, corpus, make_folds(corpus.documents.size(), 10, 5), opts).mean_accuracy;
}

Outcome text_beats_math() {
  const auto t0 = std::chrono::steady_clock::now();
  const Corpus corpus = generate_synthetic_corpus(shared_identifier_options());
  const double n = static_cast<double>(corpus.documents.size());
  const double chance = 1.0 / 14.0, sigma = std::sqrt(chance * (1 - chance) / n);
  const double text = cv_accuracy(corpus, "text_tfidf");
  const double id_tfidf = cv_accuracy(corpus, "math_id_tfidf");
  const double id_emb = cv_accuracy(corpus, "math_id_embedding");
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = text >= 0.90 && std::abs(id_tfidf - chance) <= 3 * sigma && std::abs(id_emb - chance) <= 3 * sigma &&
           elapsed < 300;
  o.detail = "text_tfidf " + fmt("%.4f", text) + ", math_id_tfidf " + fmt("%.4f", id_tfidf) +
             ", math_id_embedding " + fmt("%.4f", id_emb) + " (chance " + fmt("%.4f", chance) + " +- " +
             fmt("%.4f", 3 * sigma) + "), " + fmt("%.1f", elapsed) + " s";
  return o;
}

Outcome semantification_gain() {
  const SyntheticOptions options = shared_identifier_options();
  const SyntheticCorpus markup = generate_synthetic_markup(options);
  const Corpus corpus = generate_synthetic_corpus(options);
  const Lexicon lexicon = synthetic_lexicon(markup, 3, options.seed);
  const double base = cv_accuracy(corpus, "math_id_tfidf");
  StreamOptions append;
  append.lexicon = &lexicon;
  append.enrich_mode = EnrichMode::append;
  const double enriched = cv_accuracy(corpus, "semantified_tfidf", append);
  StreamOptions replace = append;
  replace.enrich_mode = EnrichMode::replace;
  const double replaced = cv_accuracy(corpus, "semantified_tfidf", replace);
  Outcome o;
  o.pass = enriched - base >= 0.30;
  o.detail = "math_id_tfidf " + fmt("%.4f", base) + ", semantified append " + fmt("%.4f", enriched) + " (gain " +
             fmt("%+.4f", enriched - base) + ", append keeps the text tokens), replace " + fmt("%.4f", replaced) +
             " (names only)";
  return o;
}

// 7 ------------------------------------------------------------------------

Outcome correlation() {
  Rng rng(7);
  auto random_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
    EncodedMatrix m;
    m.features.resize(rows, cols);
    for (Eigen::Index i = 0; i < m.features.size(); ++i) m.features.data()[i] = rng.uniform();
    for (Eigen::Index i = 0; i < rows; ++i) m.sample_ids.push_back(std::to_string(i));
    return m;
  };
  const EncodedMatrix a = random_matrix(100, 20);
  EncodedMatrix scaled = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) scaled.features.row(i) *= 0.5 + 5 * rng.uniform();
  const EncodedMatrix b = random_matrix(100, 20);
  const double same = text_math_correlation(a, a), rescaled = text_math_correlation(a, scaled);
  const double independent = text_math_correlation(a, b);
  const double p = pearson({1, 2, 3}, {1, 2, 2});
  Outcome o;
  o.pass = std::abs(same - 1) <= 1e-9 && std::abs(rescaled - 1) <= 1e-9 && std::abs(independent) < 0.1 &&
           std::abs(p - std::sqrt(3.0) / 2) <= 1e-9;
  o.detail = "identical " + fmt("%.12f", same) + ", rescaled " + fmt("%.12f", rescaled) + ", independent " +
             fmt("%+.4f", independent) + ", pearson fixture " + fmt("%.10f", p);
  return o;
}

// 8 and 9 --------------------------------------------------------------------

ExperimentConfig mini_config(const fs::path& out, int jobs) {
  std::ifstream in(fs::path(MATHENC_CONFIG_DIR) / "mini.json");
  nlohmann::json j = nlohmann::json::parse(in);
  j["output_dir"] = out.string();
  j["jobs"] = jobs;
  return parse_experiment_config(j.dump(), MATHENC_CONFIG_DIR);
}

Outcome determinism() {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  run_experiment(mini_config(a, 1));
  run_experiment(mini_config(b, 1));
  run_experiment(mini_config(c, 4));
  int compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("report_", 0) != 0 || entry.path().extension() != ".csv") continue;
    ++compared;
    const std::string ref = slurp(entry.path());
    differing += ref != slurp(b / name) || ref != slurp(c / name);
  }
  Outcome o;
  o.pass = compared >= 2 && differing == 0;
  o.detail = std::to_string(compared) + " report CSVs compared over 3 runs (jobs 1, 1, 4), " +
             std::to_string(differing) + " differ";
  return o;
}

Outcome end_to_end() {
  const auto out = scratch("e2e");
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig config = mini_config(out, 1);
  const ExperimentResult r = run_experiment(config);
  const double elapsed = seconds_since(t0);
  Outcome o;
  std::vector<std::string> expected = {"report_classification.csv", "report_classification.md",
                                       "report_clustering.csv",     "report_clustering.md",
                                       "correlations.csv",          "run_record.json"};
  for (const auto& e : config.encodings) {
    for (const auto& c : config.classifiers)
      expected.push_back("confusion_" + e.name() + "_" + std::string(to_string(c.algo)) + ".csv");
    for (const auto& c : config.clusterers) expected.push_back("assignment_" + e.name() + "_" + c.name() + ".csv");
  }
  int missing = 0;
  for (const auto& f : expected) missing += !fs::exists(out / f);
  const auto record = nlohmann::json::parse(slurp(out / "run_record.json"));
  for (const auto& f : record.at("files")) missing += !fs::exists(out / f.at("path").get<std::string>());
  const std::string md = slurp(out / "report_classification.md") + slurp(out / "report_clustering.md");
  const bool shaped = md.find("| **Mean** |") != std::string::npos && md.find("| **Max** |") != std::string::npos &&
                      md.find("| **Runtime [%]** |") != std::string::npos &&
                      md.find("| Mean | Max |") != std::string::npos;
  double slowest = 0;
  for (const auto* rep : {&r.classification, &r.clustering})
    for (double v : rep->runtimes_percent) slowest = std::max(slowest, v);
  bool hundred_in_rows = true;
  for (const auto* rep : {&r.classification, &r.clustering}) {
    const double m = *std::max_element(rep->runtimes_percent.begin(), rep->runtimes_percent.end());
    hundred_in_rows = hundred_in_rows && m == 100.0;
  }
  const int cells = static_cast<int>(config.encodings.size() * (config.classifiers.size() + config.clusterers.size()));
  o.pass = elapsed < 60 && missing == 0 && shaped && hundred_in_rows && r.failures.empty() &&
           config.encodings.size() == 2 && config.classifiers.size() == 2 && config.clusterers.size() == 1;
  o.detail = std::to_string(cells) + " cells in " + fmt("%.2f", elapsed) + " s, " + std::to_string(missing) +
             " missing files, table shape " + (shaped ? "ok" : "wrong") + ", slowest runtime " +
             fmt("%.1f", slowest);
  return o;
}

// 10 -----------------------------------------------------------------------

Outcome fold_invariants() {
  Rng rng(10);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(500);
    const int k = 2 + static_cast<int>(rng.index(std::min<std::size_t>(n - 1, 50)));
    const FoldPlan plan = make_folds(n, k, rng.next());
    std::vector<int> hits(n, 0);
    std::size_t lo = n, hi = 0;
    for (int f = 0; f < k; ++f) {
      const auto test = plan.test_indices(f);
      lo = std::min(lo, test.size());
      hi = std::max(hi, test.size());
      for (auto i : test) ++hits[i];
    }
    const bool cover = std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
    violations += !cover || hi - lo > 1;
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = std::to_string(violations) + "/1000 plans violate disjoint cover or size spread";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"tf-idf oracle", tfidf_oracle},
      {"purity oracle", purity_oracle},
      {"gradient checks", gradient_checks},
      {"clustering sanity", clustering_sanity},
      {"text vs math on shared identifiers", text_beats_math},
      {"semantification effect", semantification_gain},
      {"correlation", correlation},
      {"determinism", determinism},
      {"end-to-end mini grid", end_to_end},
      {"fold-plan invariants", fold_invariants},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
