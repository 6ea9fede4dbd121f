#include "mathenc/classify.hpp"
#include "mathenc/cluster.hpp"
#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/error.hpp"
#include "mathenc/evaluate.hpp"
#include "mathenc/experiment.hpp"
#include "mathenc/random.hpp"
#include "mathenc/semantify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mathenc;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

struct Common {
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool jobs_set = false;
  std::string output_dir;
};

struct LexiconFlags {
  std::string path;
  std::string source = "custom";
  std::size_t top_n = 3;
  std::string mode = "append";
};

void add_lexicon_flags(CLI::App* cmd, LexiconFlags& l) {
  cmd->add_option("--lexicon", l.path, "Lexicon TSV (symbol, name, score)")->check(CLI::ExistingFile);
  cmd->add_option("--lexicon-source", l.source, "arxiv, wikipedia, wikidata or custom");
  cmd->add_option("--top-n", l.top_n, "Name candidates per identifier")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", l.mode, "append or replace");
}

Corpus open_corpus(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::missing_file, path.string());
  return path.extension() == ".jsonl" ? read_corpus_jsonl(path) : load_corpus(path);
}

std::vector<std::string> label_names(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& l : corpus.labels()) out.push_back(l.name);
  return out;
}

fs::path output_path(const Common& common, const std::string& name) {
  const fs::path dir = common.output_dir.empty() ? fs::path(".") : fs::path(common.output_dir);
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
}

struct Encoder {
  std::optional<Lexicon> lexicon;
  StreamOptions options;

  Encoder(const Corpus& corpus, const LexiconFlags& flags) {
    options.stopwords = &corpus.stopwords;
    if (!flags.path.empty()) {
      lexicon = load_lexicon(flags.path, parse_lexicon_source(flags.source));
      options.lexicon = &*lexicon;
      options.top_n = flags.top_n;
      options.enrich_mode = parse_enrich_mode(flags.mode);
    }
  }
  EncodedMatrix all(const EncodingSpec& spec, const Corpus& corpus) const {
    return encode_all(spec, prepare_encoding_input(spec, corpus.documents, options));
  }
};

EncodingSpec encoding_with_seed(const std::string& name, const Common& common) {
  EncodingSpec spec = parse_encoding_spec(name);
  if (common.seed_set) spec.embedding.seed = derive_seed(common.seed, hash_string("embedding"));
  return spec;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config:
    case ErrorCode::invalid_argument:
    case ErrorCode::invalid_manifest:
    case ErrorCode::unknown_format:
    case ErrorCode::unknown_label:
    case ErrorCode::duplicate_id:
    case ErrorCode::empty_class:
    case ErrorCode::missing_file:
    case ErrorCode::malformed_line:
      return kValidation;
    default:
      return kRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text and formula encodings for subject classification and clustering"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()));

  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "Random seed")->each([&](const std::string&) { common.seed_set = true; });
    cmd->add_option("--jobs", common.jobs, "Parallel grid cells")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { common.jobs_set = true; });
    cmd->add_option("--output-dir", common.output_dir, "Directory for written files");
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse a manifest into a JSONL corpus dump");
  std::string manifest;
  std::string ingest_out = "corpus.jsonl";
  ingest->add_option("manifest", manifest, "Corpus manifest JSON")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", ingest_out, "JSONL file name");
  add_common(ingest);

  // encode
  auto* encode = app.add_subcommand("encode", "Encode a corpus into a feature matrix");
  std::string corpus_path, encoding_name, encode_out;
  LexiconFlags lex;
  encode->add_option("--corpus", corpus_path, "Manifest or JSONL dump")->required();
  encode->add_option("--encoding", encoding_name, "e.g. text_tfidf, math_opid_embedding")->required();
  encode->add_option("-o,--output", encode_out, "CSV file name (default <encoding>.csv)");
  add_lexicon_flags(encode, lex);
  add_common(encode);

  // classify
  auto* classify = app.add_subcommand("classify", "Cross-validate one classifier on one encoding");
  std::string classifier_json;
  int folds = 10;
  classify->add_option("--corpus", corpus_path, "Manifest or JSONL dump")->required();
  classify->add_option("--encoding", encoding_name)->required();
  classify->add_option("--classifier", classifier_json, "Name or JSON object, e.g. logreg")->required();
  classify->add_option("--folds", folds)->check(CLI::Range(2, 1000000));
  add_lexicon_flags(classify, lex);
  add_common(classify);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster an encoding and score purity");
  std::string clusterer_json, matrix_path;
  std::optional<int> k;
  cluster->add_option("--corpus", corpus_path, "Manifest or JSONL dump");
  cluster->add_option("--matrix", matrix_path, "Previously encoded matrix CSV")->check(CLI::ExistingFile);
  cluster->add_option("--encoding", encoding_name);
  cluster->add_option("--clusterer", clusterer_json, "Name or JSON object, e.g. kmeans")->required();
  cluster->add_option("--k", k, "Cluster count for fixed-k algorithms");
  add_lexicon_flags(cluster, lex);
  add_common(cluster);

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Correlate text and math similarity structure");
  std::string text_encoding, math_encoding;
  correlate->add_option("--corpus", corpus_path)->required();
  correlate->add_option("--text", text_encoding, "Text encoding")->required();
  correlate->add_option("--math", math_encoding, "Math encoding")->required();
  add_lexicon_flags(correlate, lex);
  add_common(correlate);

  // semantify
  auto* semantify = app.add_subcommand("semantify", "Enrich identifiers with lexicon names");
  std::string semantify_out = "enriched.jsonl";
  semantify->add_option("--corpus", corpus_path)->required();
  semantify->add_option("-o,--output", semantify_out, "JSONL file name");
  add_lexicon_flags(semantify, lex);
  add_common(semantify);

  // run
  auto* run = app.add_subcommand("run", "Run the full experiment grid from a config file");
  std::string config_path;
  run->add_option("config", config_path, "Experiment config JSON")->required();
  add_common(run);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with manifest and lexicon");
  SyntheticOptions synthetic;
  synth->add_option("--classes", synthetic.n_classes)->check(CLI::PositiveNumber);
  synth->add_option("--docs", synthetic.docs_per_class, "Documents per class")->check(CLI::PositiveNumber);
  synth->add_option("--vocab", synthetic.vocab_per_class, "Words per class")->check(CLI::PositiveNumber);
  synth->add_option("--identifiers", synthetic.shared_identifiers, "Shared identifier pool")
      ->check(CLI::PositiveNumber);
  synth->add_option("--words", synthetic.words_per_doc)->check(CLI::PositiveNumber);
  synth->add_option("--formulas", synthetic.formulas_per_doc)->check(CLI::NonNegativeNumber);
  synth->add_flag("--skewed-operators", synthetic.class_skewed_operators);
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (ingest->parsed()) {
      const Corpus corpus = load_corpus(manifest);
      const fs::path out = output_path(common, ingest_out);
      write_corpus_jsonl(out, corpus);
      for (const auto& s : corpus.skipped) std::cerr << "skipped " << s.id << ": " << s.reason << '\n';
      std::cout << corpus.documents.size() << " documents, " << corpus.skipped.size() << " skipped -> "
                << out.string() << '\n';
    } else if (encode->parsed()) {
      const Corpus corpus = open_corpus(corpus_path);
      const EncodingSpec spec = encoding_with_seed(encoding_name, common);
      const EncodedMatrix m = Encoder(corpus, lex).all(spec, corpus);
      const fs::path out = output_path(common, encode_out.empty() ? spec.name() + ".csv" : encode_out);
      write_encoded_matrix(m, out);
      std::cout << m.rows() << " x " << m.cols() << " -> " << out.string() << '\n';
    } else if (classify->parsed()) {
      const Corpus corpus = open_corpus(corpus_path);
      const EncodingSpec spec = encoding_with_seed(encoding_name, common);
      ClassifierSpec cls = parse_classifier_spec(classifier_json);
      cls.seed = derive_seed(common.seed, hash_string(to_string(cls.algo)));
      const FoldPlan plan = make_folds(corpus.documents.size(), folds, common.seed);
      const Encoder encoder(corpus, lex);
      const auto input = prepare_encoding_input(spec, corpus.documents, encoder.options);
      std::vector<std::string> label_set;
      for (const auto& l : corpus.label_set) label_set.push_back(l.name);
      const auto cv = cross_validate(cls, encode_folds(spec, input, plan), label_names(corpus), label_set, plan);
      const std::string cell = spec.name() + "_" + std::string(to_string(cls.algo));
      write_file(output_path(common, "confusion_" + cell + ".csv"), confusion_csv(cv.confusion));
      write_file(output_path(common, "confusion_" + cell + "_percent.csv"), confusion_csv(cv.confusion, true));
      std::printf("%s accuracy %.6f\n", cell.c_str(), cv.mean_accuracy);
      for (std::size_t f = 0; f < cv.fold_accuracies.size(); ++f)
        std::printf("  fold %zu %.6f\n", f, cv.fold_accuracies[f]);
    } else if (cluster->parsed()) {
      if (corpus_path.empty() && matrix_path.empty())
        throw Error(ErrorCode::invalid_argument, "cluster needs --corpus with --encoding, or --matrix");
      ClustererSpec spec = parse_clusterer_spec(clusterer_json);
      spec.seed = derive_seed(common.seed, hash_string(to_string(spec.algo)));
      if (k) spec.k = *k;
      std::optional<Corpus> corpus;
      if (!corpus_path.empty()) corpus = open_corpus(corpus_path);
      if (!spec.k && requires_k(spec.algo) && corpus) spec.k = static_cast<int>(corpus->label_set.size());
      spec.validate();
      EncodedMatrix m;
      if (!matrix_path.empty()) {
        m = read_encoded_matrix(matrix_path);
      } else {
        if (encoding_name.empty()) throw Error(ErrorCode::invalid_argument, "--encoding is required with --corpus");
        m = Encoder(*corpus, lex).all(encoding_with_seed(encoding_name, common), *corpus);
      }
      const ClusterAssignment a = fit_predict_clusterer(spec, m);
      const fs::path out = output_path(common, "assignment_" + m.spec.name() + "_" + spec.name() + ".csv");
      write_assignment(a, out);
      std::printf("%d clusters -> %s\n", a.n_clusters, out.string().c_str());
      if (corpus && corpus->documents.size() == a.cluster_ids.size()) {
        const auto labels = label_names(*corpus);
        std::printf("purity %.6f\nweighted_purity %.6f\n", purity(a, labels), weighted_purity(a, labels));
      }
    } else if (correlate->parsed()) {
      const Corpus corpus = open_corpus(corpus_path);
      const Encoder encoder(corpus, lex);
      const EncodedMatrix t = encoder.all(encoding_with_seed(text_encoding, common), corpus);
      const EncodedMatrix m = encoder.all(encoding_with_seed(math_encoding, common), corpus);
      try {
        std::printf("%.6f\n", text_math_correlation(t, m));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::zero_variance) throw;
        std::printf("undefined\n");
      }
    } else if (semantify->parsed()) {
      if (lex.path.empty()) throw Error(ErrorCode::invalid_argument, "--lexicon is required");
      const Corpus corpus = open_corpus(corpus_path);
      const Lexicon lexicon = load_lexicon(lex.path, parse_lexicon_source(lex.source));
      const EnrichMode mode = parse_enrich_mode(lex.mode);
      const fs::path out = output_path(common, semantify_out);
      std::ofstream file(out, std::ios::binary);
      if (!file) throw Error(ErrorCode::io_error, "cannot write " + out.string());
      for (const auto& doc : corpus.documents) {
        const EnrichedStream e = enrich(doc, lexicon, corpus.stopwords, lex.top_n, mode);
        file << json{{"id", e.doc_id}, {"label", doc.label.name}, {"tokens", e.tokens}}.dump() << '\n';
      }
      std::cout << corpus.documents.size() << " documents -> " << out.string() << '\n';
    } else if (run->parsed()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) throw Error(ErrorCode::invalid_config, "config file not found: " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
      }
      if (!j.is_object()) throw Error(ErrorCode::invalid_config, "config must be a JSON object");
      if (common.seed_set) j["seed"] = common.seed;
      if (common.jobs_set) j["jobs"] = common.jobs;
      if (!common.output_dir.empty()) j["output_dir"] = fs::absolute(common.output_dir).string();
      const ExperimentConfig config = parse_experiment_config(j.dump(), fs::path(config_path).parent_path());
      const ExperimentResult result = run_experiment(config);
      for (const auto& f : result.files) std::cout << f.string() << '\n';
      if (!result.failures.empty()) std::cerr << result.failures.size() << " cell(s) failed\n";
    } else if (synth->parsed()) {
      synthetic.seed = common.seed;
      const SyntheticCorpus s = generate_synthetic_markup(synthetic);
      const fs::path dir = common.output_dir.empty() ? fs::path("synthetic") : fs::path(common.output_dir);
      fs::create_directories(dir / "docs");
      json entries = json::array();
      for (const auto& sample : s.samples) {
        const std::string rel = "docs/" + sample.id + ".html";
        write_file(dir / rel, sample.markup);
        entries.push_back({{"id", sample.id}, {"path", rel}, {"label", sample.label}});
      }
      const json m = {{"format", "html_math"}, {"granularity", "document"}, {"label_set", s.labels},
                      {"entries", entries}};
      write_file(dir / "manifest.json", m.dump(2) + "\n");
      write_file(dir / "lexicon.tsv", lexicon_tsv(synthetic_lexicon(s, 3, common.seed)));
      std::cout << s.samples.size() << " documents -> " << (dir / "manifest.json").string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
