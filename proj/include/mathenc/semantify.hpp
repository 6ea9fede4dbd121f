#pragma once

#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mathenc {

enum class LexiconSource { arxiv, wikipedia, wikidata, custom };

std::string_view to_string(LexiconSource source);
LexiconSource parse_lexicon_source(std::string_view name);

struct NameCandidate {
  std::string name;
  double score = 0.0;

  friend bool operator==(const NameCandidate&, const NameCandidate&) = default;
};

/// Identifier symbol -> name candidates, best first.
struct Lexicon {
  LexiconSource source = LexiconSource::custom;
  std::map<std::string, std::vector<NameCandidate>> entries;

  const std::vector<NameCandidate>* find(const std::string& symbol) const;
};

/// Reads `symbol<TAB>name<TAB>score` lines. Repeated (symbol, name) pairs
/// have their scores summed; equal scores keep file order.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconSource source = LexiconSource::custom);
Lexicon parse_lexicon(std::string_view text, LexiconSource source = LexiconSource::custom);

enum class EnrichMode : int { append, replace };

std::string_view to_string(EnrichMode mode);
EnrichMode parse_enrich_mode(std::string_view name);

struct EnrichedStream {
  std::string doc_id;
  TokenStream tokens;
  std::size_t top_n = 3;
};

/// Append mode: text tokens followed by the cleaned top-n names of every
/// identifier occurrence. Replace mode: the `math_content` stream with each
/// known "id:" token swapped for those names.
EnrichedStream enrich(const Document& doc, const Lexicon& lexicon, const StopwordSet& stopwords,
                      std::size_t top_n = 3, EnrichMode mode = EnrichMode::append,
                      EncodingContent math_content = EncodingContent::math_opid);

/// Replace-mode enrichment of an existing token stream.
TokenStream enrich_stream(const TokenStream& stream, const Lexicon& lexicon,
                          const StopwordSet& stopwords, std::size_t top_n = 3);

}  // namespace mathenc
