#include "mathenc/experiment.hpp"

#include "mathenc/error.hpp"
#include "mathenc/random.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

namespace mathenc {
namespace {

using nlohmann::json;

constexpr std::string_view kVersion = "0.1.0";

[[noreturn]] void config_error(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::invalid_config, field + ": " + message);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) config_error(where.empty() ? key : where + "." + key, "unknown field");
  }
}

template <typename T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where + "." + key, "wrong type");
  }
}

void read_embedding(const json& j, const std::string& where, EmbeddingParams& p) {
  check_keys(j, where,
             {"size", "window", "min_count", "initial_alpha", "min_alpha", "iters_per_epoch", "epochs",
              "alpha_decay_per_epoch", "negative", "seed", "inference_steps", "inference_alpha", "name",
              "concatenate_vectors"});
  read(j, where, "size", p.size);
  read(j, where, "window", p.window);
  read(j, where, "min_count", p.min_count);
  read(j, where, "initial_alpha", p.initial_alpha);
  read(j, where, "min_alpha", p.min_alpha);
  read(j, where, "iters_per_epoch", p.iters_per_epoch);
  read(j, where, "epochs", p.epochs);
  read(j, where, "alpha_decay_per_epoch", p.alpha_decay_per_epoch);
  read(j, where, "negative", p.negative);
  read(j, where, "seed", p.seed);
  read(j, where, "inference_steps", p.inference_steps);
  read(j, where, "inference_alpha", p.inference_alpha);
}

ClassifierSpec classifier_from_json(const json& j, const std::string& where, std::uint64_t base_seed) {
  ClassifierSpec s;
  std::string algo;
  if (j.is_string()) {
    algo = j.get<std::string>();
  } else {
    if (!j.is_object() || !j.contains("algo")) config_error(where, "expected a name or an object with \"algo\"");
    read(j, where, "algo", algo);
  }
  try {
    s.algo = parse_classifier_algo(algo);
  } catch (const Error&) {
    config_error(where + ".algo", "unknown classifier '" + algo + "'");
  }
  s.seed = derive_seed(base_seed, hash_string(to_string(s.algo)));
  if (j.is_object()) {
    switch (s.algo) {
      case ClassifierAlgo::logreg:
        check_keys(j, where, {"algo", "seed", "C", "max_epochs", "tol"});
        read(j, where, "C", s.logreg.C);
        read(j, where, "max_epochs", s.logreg.max_epochs);
        read(j, where, "tol", s.logreg.tol);
        break;
      case ClassifierAlgo::linear_svc:
        check_keys(j, where, {"algo", "seed", "C", "max_epochs"});
        read(j, where, "C", s.svc.C);
        read(j, where, "max_epochs", s.svc.max_epochs);
        break;
      case ClassifierAlgo::knn:
        check_keys(j, where, {"algo", "seed", "k"});
        read(j, where, "k", s.knn.k);
        break;
      case ClassifierAlgo::mlp:
        check_keys(j, where, {"algo", "seed", "hidden", "learning_rate", "beta1", "beta2", "epsilon",
                              "batch_size", "max_epochs", "tol", "patience", "l2"});
        read(j, where, "hidden", s.mlp.hidden);
        read(j, where, "learning_rate", s.mlp.learning_rate);
        read(j, where, "beta1", s.mlp.beta1);
        read(j, where, "beta2", s.mlp.beta2);
        read(j, where, "epsilon", s.mlp.epsilon);
        read(j, where, "batch_size", s.mlp.batch_size);
        read(j, where, "max_epochs", s.mlp.max_epochs);
        read(j, where, "tol", s.mlp.tol);
        read(j, where, "patience", s.mlp.patience);
        read(j, where, "l2", s.mlp.l2);
        break;
      case ClassifierAlgo::dectree:
        check_keys(j, where, {"algo", "seed", "max_depth", "min_samples_split"});
        read(j, where, "max_depth", s.tree.max_depth);
        read(j, where, "min_samples_split", s.tree.min_samples_split);
        break;
      case ClassifierAlgo::randforest:
        check_keys(j, where, {"algo", "seed", "n_trees", "bootstrap", "max_features", "max_depth",
                              "min_samples_split"});
        read(j, where, "n_trees", s.forest.n_trees);
        read(j, where, "bootstrap", s.forest.bootstrap);
        read(j, where, "max_features", s.forest.max_features);
        read(j, where, "max_depth", s.forest.tree.max_depth);
        read(j, where, "min_samples_split", s.forest.tree.min_samples_split);
        break;
    }
    read(j, where, "seed", s.seed);
  }
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return s;
}

ClustererSpec clusterer_from_json(const json& j, const std::string& where, std::uint64_t base_seed) {
  ClustererSpec s;
  std::string algo;
  if (j.is_string()) {
    algo = j.get<std::string>();
  } else {
    if (!j.is_object() || !j.contains("algo")) config_error(where, "expected a name or an object with \"algo\"");
    read(j, where, "algo", algo);
  }
  try {
    s.algo = parse_cluster_algo(algo);
  } catch (const Error&) {
    config_error(where + ".algo", "unknown clusterer '" + algo + "'");
  }
  s.seed = derive_seed(base_seed, hash_string(to_string(s.algo)));
  if (j.is_object()) {
    auto read_optional_int = [&](const char* key, std::optional<int>& out) {
      if (!j.contains(key) || j.at(key).is_null()) return;
      int v = 0;
      read(j, where, key, v);
      out = v;
    };
    read_optional_int("k", s.k);
    read_optional_int("pca_dims", s.pca_dims);
    read(j, where, "seed", s.seed);
    switch (s.algo) {
      case ClusterAlgo::kmeans:
        check_keys(j, where, {"algo", "seed", "k", "pca_dims", "max_iter", "n_init"});
        read(j, where, "max_iter", s.kmeans.max_iter);
        read(j, where, "n_init", s.kmeans.n_init);
        break;
      case ClusterAlgo::agglomerative:
        check_keys(j, where, {"algo", "seed", "k", "pca_dims"});
        break;
      case ClusterAlgo::gmm:
        check_keys(j, where, {"algo", "seed", "k", "pca_dims", "max_iter", "tol", "covariance_floor"});
        read(j, where, "max_iter", s.gmm.max_iter);
        read(j, where, "tol", s.gmm.tol);
        read(j, where, "covariance_floor", s.gmm.covariance_floor);
        break;
      case ClusterAlgo::affinity: {
        check_keys(j, where, {"algo", "seed", "k", "pca_dims", "damping", "max_iter", "convergence_iter", "preference"});
        read(j, where, "damping", s.affinity.damping);
        read(j, where, "max_iter", s.affinity.max_iter);
        read(j, where, "convergence_iter", s.affinity.convergence_iter);
        if (j.contains("preference") && !j.at("preference").is_null()) {
          double v = 0;
          read(j, where, "preference", v);
          s.affinity.preference = v;
        }
        break;
      }
      case ClusterAlgo::meanshift: {
        check_keys(j, where, {"algo", "seed", "k", "pca_dims", "quantile", "bandwidth", "max_iter"});
        read(j, where, "quantile", s.meanshift.quantile);
        read(j, where, "max_iter", s.meanshift.max_iter);
        if (j.contains("bandwidth") && !j.at("bandwidth").is_null()) {
          double v = 0;
          read(j, where, "bandwidth", v);
          s.meanshift.bandwidth = v;
        }
        break;
      }
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  return s;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

// Runs fn(0..n-1) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : threads) t.join();
}

std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '-';
  return s;
}

// Appends " (2)", " (3)", ... to repeated names.
std::vector<std::string> unique_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (const auto& n : names) {
    const int count = ++seen[n];
    out.push_back(count == 1 ? n : n + " (" + std::to_string(count) + ")");
  }
  return out;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string_view version() { return kVersion; }

void ExperimentConfig::validate() const {
  if (corpus_manifest.empty() == corpus_jsonl.empty())
    config_error("corpus_manifest", "exactly one of corpus_manifest and corpus_jsonl is required");
  const auto& corpus_path = corpus_manifest.empty() ? corpus_jsonl : corpus_manifest;
  if (!std::filesystem::exists(corpus_path))
    config_error(corpus_manifest.empty() ? "corpus_jsonl" : "corpus_manifest",
                 "file not found: " + corpus_path.string());
  if (encodings.empty()) config_error("encodings", "at least one encoding is required");
  if (classifiers.empty() && clusterers.empty())
    config_error("classifiers", "at least one classifier or clusterer is required");
  if (n_folds < 2) config_error("n_folds", "must be at least 2");
  if (jobs < 1) config_error("jobs", "must be at least 1");
  if (output_dir.empty()) config_error("output_dir", "must not be empty");
  for (const auto& e : encodings) {
    if (e.content == EncodingContent::semantified && !lexicon)
      config_error("lexicon", "required by encoding " + e.name());
    if (e.method == EncodingMethod::embedding) {
      try {
        e.embedding.validate();
      } catch (const Error& err) {
        config_error("embedding", err.what());
      }
    }
  }
  if (lexicon) {
    if (!std::filesystem::exists(lexicon->path)) config_error("lexicon.path", "file not found: " + lexicon->path.string());
    if (lexicon->top_n < 1) config_error("lexicon.top_n", "must be at least 1");
  }
}

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"corpus_manifest", "corpus_jsonl", "granularity", "encodings", "embedding", "classifiers",
                     "clusterers", "n_folds", "seed", "lexicon", "output_dir", "jobs", "correlations"});
  ExperimentConfig c;
  std::string path;
  read(j, "config", "seed", c.seed);
  if (j.contains("corpus_manifest")) {
    read(j, "config", "corpus_manifest", path);
    c.corpus_manifest = resolve(base_dir, path);
  }
  if (j.contains("corpus_jsonl")) {
    read(j, "config", "corpus_jsonl", path);
    c.corpus_jsonl = resolve(base_dir, path);
  }
  if (j.contains("granularity")) {
    std::string g;
    read(j, "config", "granularity", g);
    try {
      c.granularity = parse_granularity(g);
    } catch (const Error&) {
      config_error("granularity", "unknown granularity '" + g + "'");
    }
  }

  EmbeddingParams embedding;
  embedding.seed = derive_seed(c.seed, hash_string("embedding"));
  if (j.contains("embedding")) read_embedding(j.at("embedding"), "embedding", embedding);
  if (j.contains("encodings")) {
    if (!j.at("encodings").is_array()) config_error("encodings", "expected an array");
    std::size_t i = 0;
    for (const auto& e : j.at("encodings")) {
      const std::string where = "encodings[" + std::to_string(i++) + "]";
      std::string name;
      if (e.is_string()) {
        name = e.get<std::string>();
      } else if (e.is_object() && e.contains("name")) {
        read(e, where, "name", name);
      } else {
        config_error(where, "expected a name or an object with \"name\"");
      }
      EncodingSpec spec;
      try {
        spec = parse_encoding_spec(name);
      } catch (const Error&) {
        config_error(where, "unknown encoding '" + name + "'");
      }
      spec.embedding = embedding;
      if (e.is_object()) {
        read_embedding(e, where, spec.embedding);
        read(e, where, "concatenate_vectors", spec.concatenate_vectors);
      }
      c.encodings.push_back(spec);
    }
  }
  if (j.contains("classifiers")) {
    if (!j.at("classifiers").is_array()) config_error("classifiers", "expected an array");
    std::size_t i = 0;
    for (const auto& e : j.at("classifiers"))
      c.classifiers.push_back(classifier_from_json(e, "classifiers[" + std::to_string(i++) + "]", c.seed));
  }
  if (j.contains("clusterers")) {
    if (!j.at("clusterers").is_array()) config_error("clusterers", "expected an array");
    std::size_t i = 0;
    for (const auto& e : j.at("clusterers"))
      c.clusterers.push_back(clusterer_from_json(e, "clusterers[" + std::to_string(i++) + "]", c.seed));
  }
  read(j, "config", "n_folds", c.n_folds);
  read(j, "config", "jobs", c.jobs);
  read(j, "config", "correlations", c.correlations);
  if (j.contains("output_dir")) {
    read(j, "config", "output_dir", path);
    c.output_dir = resolve(base_dir, path);
  } else {
    c.output_dir = base_dir / "results";
  }
  if (j.contains("lexicon")) {
    const auto& l = j.at("lexicon");
    check_keys(l, "lexicon", {"path", "source", "top_n", "mode"});
    LexiconConfig lc;
    if (!l.contains("path")) config_error("lexicon.path", "missing");
    read(l, "lexicon", "path", path);
    lc.path = resolve(base_dir, path);
    std::string value;
    if (l.contains("source")) {
      read(l, "lexicon", "source", value);
      try {
        lc.source = parse_lexicon_source(value);
      } catch (const Error&) {
        config_error("lexicon.source", "unknown source '" + value + "'");
      }
    }
    read(l, "lexicon", "top_n", lc.top_n);
    if (l.contains("mode")) {
      read(l, "lexicon", "mode", value);
      try {
        lc.mode = parse_enrich_mode(value);
      } catch (const Error&) {
        config_error("lexicon.mode", "unknown mode '" + value + "'");
      }
    }
    c.lexicon = lc;
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_config, "config file not found: " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_experiment_config(text, path.parent_path());
}

ClassifierSpec parse_classifier_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    j = std::string(text);
  }
  return classifier_from_json(j, "classifier", 0);
}

ClustererSpec parse_clusterer_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    j = std::string(text);
  }
  return clusterer_from_json(j, "clusterer", 0);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const Corpus corpus =
      config.corpus_manifest.empty() ? read_corpus_jsonl(config.corpus_jsonl) : load_corpus(config.corpus_manifest);
  return run_experiment(config, corpus);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Corpus& corpus) {
  if (config.encodings.empty()) config_error("encodings", "at least one encoding is required");
  if (config.classifiers.empty() && config.clusterers.empty())
    config_error("classifiers", "at least one classifier or clusterer is required");
  const std::string started = timestamp();
  const auto run_start = std::chrono::steady_clock::now();
  const Granularity granularity = config.granularity.value_or(corpus.granularity);
  std::filesystem::create_directories(config.output_dir);

  std::optional<Lexicon> lexicon;
  if (config.lexicon) lexicon = load_lexicon(config.lexicon->path, config.lexicon->source);
  StreamOptions options;
  options.stopwords = &corpus.stopwords;
  if (lexicon) {
    options.lexicon = &*lexicon;
    options.top_n = config.lexicon->top_n;
    options.enrich_mode = config.lexicon->mode;
  }

  std::vector<std::string> labels, label_set;
  for (const auto& l : corpus.labels()) labels.push_back(l.name);
  for (const auto& l : corpus.label_set) label_set.push_back(l.name);

  ExperimentResult result;
  std::mutex mutex;
  auto fail = [&](const std::string& cell, const std::exception& e) {
    std::lock_guard lock(mutex);
    result.failures.push_back(cell + ": " + e.what());
    std::cerr << "warning: " << cell << " failed: " << e.what() << '\n';
  };

  const std::size_t n_enc = config.encodings.size();
  std::vector<std::string> row_names;
  for (const auto& e : config.encodings) {
    std::string label = e.label(granularity);
    if (e.concatenate_vectors) label += "_concat";
    row_names.push_back(label);
  }
  row_names = unique_names(row_names);

  // Encodings: per-fold fits for classification, one full fit for clustering
  // and correlations.
  const bool need_full = !config.clusterers.empty() || config.correlations;
  std::optional<FoldPlan> plan;
  if (!config.classifiers.empty()) plan = make_folds(corpus.documents.size(), config.n_folds, config.seed);
  std::vector<std::optional<std::vector<SplitEncoding>>> folds(n_enc);
  std::vector<std::optional<EncodedMatrix>> full(n_enc);
  parallel_for(n_enc, config.jobs, [&](std::size_t e) {
    const auto& spec = config.encodings[e];
    try {
      const EncodingInput input = prepare_encoding_input(spec, corpus.documents, options);
      if (plan) folds[e] = encode_folds(spec, input, *plan);
      if (need_full) full[e] = encode_all(spec, input);
    } catch (const std::exception& ex) {
      fail("encoding " + spec.name(), ex);
    }
  });

  const auto dir = config.output_dir;
  std::vector<json> files;
  auto record_file = [&](const std::filesystem::path& p, const std::string& schema) {
    std::lock_guard lock(mutex);
    files.push_back({{"path", p.filename().string()}, {"schema", schema}});
    result.files.push_back(p);
  };

  // Classification grid.
  const std::size_t n_cls = config.classifiers.size();
  std::vector<std::string> cls_names, cls_keys;
  for (const auto& c : config.classifiers) {
    cls_names.emplace_back(display_name(c.algo));
    cls_keys.emplace_back(to_string(c.algo));
  }
  cls_names = unique_names(cls_names);
  cls_keys = unique_names(cls_keys);
  std::vector<std::vector<std::optional<double>>> acc(n_enc, std::vector<std::optional<double>>(n_cls));
  std::vector<std::vector<double>> cls_seconds(n_enc, std::vector<double>(n_cls, 0.0));
  parallel_for(n_enc * n_cls, config.jobs, [&](std::size_t cell) {
    const std::size_t e = cell / n_cls, c = cell % n_cls;
    const std::string name = config.encodings[e].name() + "_" + cls_keys[c];
    if (!folds[e]) return;
    try {
      const auto start = std::chrono::steady_clock::now();
      const auto cv = cross_validate(config.classifiers[c], *folds[e], labels, label_set, *plan);
      cls_seconds[e][c] = seconds_since(start);
      acc[e][c] = 100.0 * cv.mean_accuracy;
      const auto base = dir / ("confusion_" + file_safe(name));
      write_text(base.string() + ".csv", confusion_csv(cv.confusion));
      write_text(base.string() + "_percent.csv", confusion_csv(cv.confusion, true));
      record_file(base.string() + ".csv", "confusion_counts_csv");
      record_file(base.string() + "_percent.csv", "confusion_percent_csv");
    } catch (const std::exception& ex) {
      fail("classification " + name, ex);
    }
  });

  // Clustering grid.
  const std::size_t n_clu = config.clusterers.size();
  std::vector<std::string> clu_names, clu_keys;
  std::vector<int> clu_groups;
  for (const auto& c : config.clusterers) {
    clu_names.emplace_back(display_name(c.algo));
    clu_keys.push_back(c.name());
    clu_groups.push_back(requires_k(c.algo) ? 0 : 1);
  }
  clu_names = unique_names(clu_names);
  clu_keys = unique_names(clu_keys);
  std::vector<std::vector<std::optional<double>>> pur(n_enc, std::vector<std::optional<double>>(n_clu));
  std::vector<std::vector<std::optional<double>>> wpur(n_enc, std::vector<std::optional<double>>(n_clu));
  std::vector<std::vector<double>> clu_seconds(n_enc, std::vector<double>(n_clu, 0.0));
  parallel_for(n_enc * n_clu, config.jobs, [&](std::size_t cell) {
    const std::size_t e = cell / n_clu, c = cell % n_clu;
    const std::string name = config.encodings[e].name() + "_" + clu_keys[c];
    if (!full[e]) return;
    try {
      const auto start = std::chrono::steady_clock::now();
      const ClusterAssignment a = fit_predict_clusterer(config.clusterers[c], *full[e]);
      clu_seconds[e][c] = seconds_since(start);
      pur[e][c] = 100.0 * purity(a, labels);
      wpur[e][c] = 100.0 * weighted_purity(a, labels);
      if (!a.diagnostics.converged) {
        std::lock_guard lock(mutex);
        std::cerr << "warning: " << name << " did not converge\n";
      }
      const auto path = dir / ("assignment_" + file_safe(name) + ".csv");
      write_assignment(a, path);
      record_file(path, "assignment_csv");
      record_file(sidecar_path(path), "assignment_sidecar_json");
    } catch (const std::exception& ex) {
      fail("clustering " + name, ex);
    }
  });

  // Text-math correlations between encodings of the same method.
  if (config.correlations) {
    for (std::size_t t = 0; t < n_enc; ++t) {
      if (!config.encodings[t].is_text() || !full[t]) continue;
      for (std::size_t m = 0; m < n_enc; ++m) {
        if (!config.encodings[m].is_math() || !full[m]) continue;
        if (config.encodings[m].method != config.encodings[t].method) continue;
        CorrelationEntry entry{row_names[t], row_names[m], std::nullopt};
        try {
          entry.correlation = text_math_correlation(*full[t], *full[m]);
        } catch (const Error& ex) {
          if (ex.code() != ErrorCode::zero_variance) fail("correlation " + row_names[m], ex);
        }
        result.correlations.push_back(entry);
      }
    }
  }

  auto column_seconds = [](const std::vector<std::vector<double>>& seconds, std::size_t cols) {
    std::vector<double> out(cols, 0.0);
    for (const auto& row : seconds)
      for (std::size_t c = 0; c < cols; ++c) out[c] += row[c];
    return out;
  };
  std::map<std::string, std::string> metadata = {
      {"granularity", std::string(to_string(granularity))},
      {"samples", std::to_string(corpus.documents.size())},
      {"classes", std::to_string(corpus.label_set.size())},
      {"seed", std::to_string(config.seed)},
  };

  if (n_cls) {
    auto meta = metadata;
    meta["folds"] = std::to_string(config.n_folds);
    meta["metric"] = "mean cross-validated accuracy [%]";
    result.classification = build_report(row_names, cls_names, acc, column_seconds(cls_seconds, n_cls), meta);
    result.classification.corner = "Encoding/Classifier";
    write_text(dir / "report_classification.csv", report_csv(result.classification));
    write_text(dir / "report_classification.md", report_markdown(result.classification, "Classification accuracy [%]"));
    record_file(dir / "report_classification.csv", "report_csv");
    record_file(dir / "report_classification.md", "report_markdown");
  }
  if (n_clu) {
    auto meta = metadata;
    meta["metric"] = "macro purity [%]";
    result.clustering = build_report(row_names, clu_names, pur, column_seconds(clu_seconds, n_clu), meta, clu_groups);
    result.clustering.corner = "Encoding/Clusterer";
    meta["metric"] = "sample-weighted purity [%]";
    result.clustering_weighted =
        build_report(row_names, clu_names, wpur, column_seconds(clu_seconds, n_clu), meta, clu_groups);
    result.clustering_weighted.corner = "Encoding/Clusterer";
    write_text(dir / "report_clustering.csv", report_csv(result.clustering));
    write_text(dir / "report_clustering.md", report_markdown(result.clustering, "Clustering purity [%]"));
    write_text(dir / "report_clustering_weighted.csv", report_csv(result.clustering_weighted));
    write_text(dir / "report_clustering_weighted.md",
               report_markdown(result.clustering_weighted, "Clustering purity, sample-weighted [%]"));
    record_file(dir / "report_clustering.csv", "report_csv");
    record_file(dir / "report_clustering.md", "report_markdown");
    record_file(dir / "report_clustering_weighted.csv", "report_csv");
    record_file(dir / "report_clustering_weighted.md", "report_markdown");
  }
  if (config.correlations) {
    std::string csv = "text_encoding,math_encoding,correlation\n";
    for (const auto& c : result.correlations) {
      char value[64] = "undefined";
      if (c.correlation) std::snprintf(value, sizeof value, "%.6f", *c.correlation);
      csv += c.text_encoding + "," + c.math_encoding + "," + value + "\n";
    }
    write_text(dir / "correlations.csv", csv);
    record_file(dir / "correlations.csv", "correlations_csv");
  }

  json record;
  record["version"] = kVersion;
  record["started_at"] = started;
  record["finished_at"] = timestamp();
  record["wall_seconds"] = seconds_since(run_start);
  record["seed"] = config.seed;
  record["n_folds"] = config.n_folds;
  record["jobs"] = config.jobs;
  record["granularity"] = to_string(granularity);
  record["corpus"] = {{"source", (config.corpus_manifest.empty() ? config.corpus_jsonl : config.corpus_manifest).string()},
                      {"documents", corpus.documents.size()},
                      {"classes", label_set},
                      {"skipped", json::array()}};
  for (const auto& s : corpus.skipped)
    record["corpus"]["skipped"].push_back({{"id", s.id}, {"path", s.path}, {"reason", s.reason}});
  std::vector<std::string> enc_names;
  for (const auto& e : config.encodings) enc_names.push_back(e.name());
  record["encodings"] = enc_names;
  json seeds = json::object();
  for (std::size_t c = 0; c < n_cls; ++c) seeds["classifier:" + cls_keys[c]] = config.classifiers[c].seed;
  for (std::size_t c = 0; c < n_clu; ++c) seeds["clusterer:" + clu_keys[c]] = config.clusterers[c].seed;
  for (std::size_t e = 0; e < n_enc; ++e)
    if (config.encodings[e].method == EncodingMethod::embedding)
      seeds["embedding:" + config.encodings[e].name()] = config.encodings[e].embedding.seed;
  record["seeds"] = seeds;
  json runtimes = json::object();
  for (std::size_t e = 0; e < n_enc; ++e) {
    for (std::size_t c = 0; c < n_cls; ++c) runtimes[enc_names[e] + "_" + cls_keys[c]] = cls_seconds[e][c];
    for (std::size_t c = 0; c < n_clu; ++c) runtimes[enc_names[e] + "_" + clu_keys[c]] = clu_seconds[e][c];
  }
  record["cell_seconds"] = runtimes;
  if (config.lexicon)
    record["lexicon"] = {{"path", config.lexicon->path.string()},
                         {"source", to_string(config.lexicon->source)},
                         {"top_n", config.lexicon->top_n},
                         {"mode", to_string(config.lexicon->mode)}};
  record["failures"] = result.failures;
  std::sort(files.begin(), files.end(), [](const json& a, const json& b) { return a["path"] < b["path"]; });
  record["files"] = files;
  write_text(dir / "run_record.json", record.dump(2) + "\n");
  result.files.push_back(dir / "run_record.json");
  return result;
}

}  // namespace mathenc
