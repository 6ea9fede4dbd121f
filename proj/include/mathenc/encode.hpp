#pragma once

#include "mathenc/corpus.hpp"
#include "mathenc/embedding.hpp"
#include "mathenc/linalg.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mathenc {

struct Lexicon;
enum class EnrichMode : int;

enum class EncodingContent {
  text,
  math_op,
  math_id,
  math_opid,
  math_surroundings,
  textmath_opid,
  textmath_surroundings,
  /// Identifier symbols enriched with lexicon name candidates.
  semantified,
};

enum class EncodingMethod { tfidf, embedding };

std::string_view to_string(EncodingContent content);
std::string_view to_string(EncodingMethod method);
EncodingContent parse_encoding_content(std::string_view name);

struct EncodingSpec {
  EncodingContent content = EncodingContent::text;
  EncodingMethod method = EncodingMethod::tfidf;
  EmbeddingParams embedding;
  /// For textmath contents with the embedding method: train text and math
  /// models separately and concatenate their vectors instead of training
  /// one model on the combined stream.
  bool concatenate_vectors = false;

  /// Canonical short name, e.g. "text_tfidf", "math_opid_embedding".
  std::string name() const;
  /// Row label in the style of the result tables, e.g. "docText_tfidf",
  /// "doc2vecMath_opid".
  std::string label(Granularity granularity) const;

  bool is_text() const { return content == EncodingContent::text; }
  bool is_math() const;
};

/// Accepts "<content>_<method>" with an optional "+concat" suffix.
EncodingSpec parse_encoding_spec(std::string_view name);

struct StreamOptions {
  const StopwordSet* stopwords = nullptr;
  std::size_t surroundings_window = 500;
  /// Required by EncodingContent::semantified.
  const Lexicon* lexicon = nullptr;
  std::size_t top_n = 3;
  EnrichMode enrich_mode{};

  const StopwordSet& stopword_set() const;
};

/// Token sequence for one document; math tokens carry "op:" / "id:" prefixes.
TokenStream token_stream(const Document& doc, EncodingContent content,
                         const StreamOptions& options = {});

struct EncodedMatrix {
  EncodingSpec spec;
  std::vector<std::string> sample_ids;
  Matrix features;
  std::optional<std::vector<std::string>> feature_names;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  /// Throws on row-count mismatch or non-finite entries.
  void validate() const;
};

struct TfidfModel {
  /// Column order is lexicographic token order.
  std::vector<std::string> feature_names;
  std::unordered_map<std::string, Eigen::Index> vocabulary;
  Vector idf;
  std::size_t n_docs_fitted = 0;
};

/// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
TfidfModel fit_tfidf(const std::vector<TokenStream>& bags);

/// Raw counts times idf, rows L2-normalised; unseen tokens are ignored.
Matrix transform_tfidf(const TfidfModel& model, const std::vector<TokenStream>& bags);

/// Streams ready for one encoding: `primary` feeds the encoder; `secondary`
/// is only filled for concatenated text+math embeddings (math part).
struct EncodingInput {
  std::vector<std::string> ids;
  std::vector<TokenStream> primary;
  std::vector<TokenStream> secondary;
};

EncodingInput prepare_encoding_input(const EncodingSpec& spec, const std::vector<Document>& docs,
                                     const StreamOptions& options);

struct SplitEncoding {
  EncodedMatrix train;
  EncodedMatrix test;
};

/// Fits the encoder on the `train` rows only and encodes both index sets.
SplitEncoding encode_split(const EncodingSpec& spec, const EncodingInput& input,
                           std::span<const std::size_t> train, std::span<const std::size_t> test);

/// Fits on every row and returns the encoded training matrix.
EncodedMatrix encode_all(const EncodingSpec& spec, const EncodingInput& input);

/// CSV with header sample_id,f0,...,fN plus a JSON sidecar next to it.
void write_encoded_matrix(const EncodedMatrix& m, const std::filesystem::path& csv_path);
EncodedMatrix read_encoded_matrix(const std::filesystem::path& csv_path);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace mathenc
