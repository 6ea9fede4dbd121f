#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mathenc {

using StopwordSet = std::unordered_set<std::string>;

/// The bundled English stopword list (data/stopwords_en.txt, compiled in).
const StopwordSet& default_stopwords();

/// Reads a stopword file: one word per line, '#' starts a comment line.
StopwordSet load_stopwords(const std::filesystem::path& path);

struct SubjectClass {
  std::string name;

  friend auto operator<=>(const SubjectClass&, const SubjectClass&) = default;
};

/// The 14 arXiv subject classes of the arXMLiv document selection.
const std::vector<SubjectClass>& default_label_set();

enum class MarkupFormat { html_math, tei_formula };
enum class Granularity { document, section, abstract };

MarkupFormat parse_markup_format(std::string_view name);
std::string_view to_string(MarkupFormat format);
Granularity parse_granularity(std::string_view name);
std::string_view to_string(Granularity granularity);

/// Code point that stands in for a formula inside Document::raw_text.
inline constexpr char32_t kFormulaPlaceholder = U'\uFFFC';

struct Formula {
  std::vector<std::string> operators;
  std::vector<std::string> identifiers;
  /// Code-point index of the formula's placeholder in Document::raw_text.
  std::size_t offset = 0;
  /// Element kinds in document order: 'o' for an operator, 'i' for an
  /// identifier. Lets consumers interleave the two lists.
  std::string order;

  friend bool operator==(const Formula&, const Formula&) = default;
};

struct Document {
  std::string id;
  SubjectClass label;
  /// UTF-8 character data outside formula containers, one placeholder per
  /// container.
  std::string raw_text;
  std::vector<std::string> text_tokens;
  std::vector<Formula> formulas;

  friend bool operator==(const Document&, const Document&) = default;
};

struct SkippedSample {
  std::string id;
  std::string path;
  std::string reason;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<SubjectClass> label_set;
  Granularity granularity = Granularity::document;
  StopwordSet stopwords;
  std::vector<SkippedSample> skipped;

  std::vector<SubjectClass> labels() const;
  /// Throws on duplicate ids or labels outside label_set.
  void validate() const;
};

/// Lowercased letter/digit/underscore runs with stopwords, digit-bearing
/// tokens and tokens shorter than three characters removed.
std::vector<std::string> clean_text(std::string_view raw, const StopwordSet& stopwords);

Document parse_document(std::string_view raw_markup, MarkupFormat format, std::string id,
                        SubjectClass label, const StopwordSet& stopwords);

/// Cleaned tokens from the +-window character neighbourhood of every
/// identifier-bearing formula, concatenated in document order.
std::vector<std::string> extract_surroundings(const Document& doc, const StopwordSet& stopwords,
                                              std::size_t window = 500);

/// Loads a JSON manifest; paths are resolved relative to the manifest.
/// Unparsable samples are recorded in Corpus::skipped.
Corpus load_corpus(const std::filesystem::path& manifest_path);

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);
void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus);
/// Label set is rebuilt from first appearance; stopwords default to the
/// bundled list.
Corpus read_corpus_jsonl(std::istream& in);
Corpus read_corpus_jsonl(const std::filesystem::path& path);

}  // namespace mathenc
