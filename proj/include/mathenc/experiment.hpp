#pragma once

#include "mathenc/classify.hpp"
#include "mathenc/cluster.hpp"
#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/evaluate.hpp"
#include "mathenc/semantify.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mathenc {

struct SyntheticOptions {
  int n_classes = 14;
  int docs_per_class = 50;
  int vocab_per_class = 40;
  int shared_identifiers = 20;
  int words_per_doc = 80;
  int formulas_per_doc = 4;
  /// Identifiers per formula; formulas alternate identifiers and operators.
  int identifiers_per_formula = 4;
  /// Give every class its own preferred operators.
  bool class_skewed_operators = false;
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  std::string id;
  std::string label;
  /// html_math markup.
  std::string markup;
};

struct SyntheticCorpus {
  std::vector<SyntheticSample> samples;
  /// Disjoint text vocabulary of every class, in label order.
  std::vector<std::vector<std::string>> class_vocabularies;
  std::vector<std::string> identifiers;
  std::vector<std::string> labels;
};

/// Markup for every sample; deterministic per seed.
SyntheticCorpus generate_synthetic_markup(const SyntheticOptions& options);

/// Parsed corpus; classes share one identifier pool and have disjoint
/// text vocabularies.
Corpus generate_synthetic_corpus(const SyntheticOptions& options);
Corpus generate_synthetic_corpus(int n_classes, int docs_per_class, int vocab_per_class,
                                 int shared_identifiers, std::uint64_t seed);

/// Lexicon whose name candidates for each identifier are words drawn from
/// the class vocabularies.
Lexicon synthetic_lexicon(const SyntheticCorpus& synthetic, int names_per_identifier = 3,
                          std::uint64_t seed = 0);
std::string lexicon_tsv(const Lexicon& lexicon);

struct LexiconConfig {
  std::filesystem::path path;
  LexiconSource source = LexiconSource::custom;
  std::size_t top_n = 3;
  EnrichMode mode = EnrichMode::append;
};

struct ExperimentConfig {
  std::filesystem::path corpus_manifest;
  /// Alternative to the manifest: a corpus dump written by `ingest`.
  std::filesystem::path corpus_jsonl;
  std::optional<Granularity> granularity;
  std::vector<EncodingSpec> encodings;
  std::vector<ClassifierSpec> classifiers;
  std::vector<ClustererSpec> clusterers;
  int n_folds = 10;
  std::uint64_t seed = 0;
  std::optional<LexiconConfig> lexicon;
  std::filesystem::path output_dir = "results";
  int jobs = 1;
  bool correlations = true;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

/// Parses the JSON config; relative paths are resolved against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

ClassifierSpec parse_classifier_spec(std::string_view json_text);
ClustererSpec parse_clusterer_spec(std::string_view json_text);

struct CorrelationEntry {
  std::string text_encoding;
  std::string math_encoding;
  /// Empty when one similarity series is constant.
  std::optional<double> correlation;
};

struct ExperimentResult {
  EvaluationReport classification;
  EvaluationReport clustering;
  EvaluationReport clustering_weighted;
  std::vector<CorrelationEntry> correlations;
  std::vector<std::string> failures;
  std::vector<std::filesystem::path> files;
};

/// Runs the full grid and writes every output file into config.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);
/// As above on an already loaded corpus.
ExperimentResult run_experiment(const ExperimentConfig& config, const Corpus& corpus);

/// Library version recorded in run records.
std::string_view version();

}  // namespace mathenc
