#include "mathenc/semantify.hpp"

#include "mathenc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mathenc {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

// Names from the top-n candidates, cleaned like document text.
std::vector<std::string> candidate_tokens(const Lexicon& lexicon, const std::string& symbol,
                                          const StopwordSet& stopwords, std::size_t top_n) {
  std::vector<std::string> out;
  const auto* candidates = lexicon.find(symbol);
  if (!candidates) return out;
  const std::size_t n = std::min(top_n, candidates->size());
  for (std::size_t i = 0; i < n; ++i) {
    auto tokens = clean_text((*candidates)[i].name, stopwords);
    out.insert(out.end(), tokens.begin(), tokens.end());
  }
  return out;
}

}  // namespace

std::string_view to_string(LexiconSource source) {
  switch (source) {
    case LexiconSource::arxiv: return "arxiv";
    case LexiconSource::wikipedia: return "wikipedia";
    case LexiconSource::wikidata: return "wikidata";
    case LexiconSource::custom: return "custom";
  }
  return "custom";
}

LexiconSource parse_lexicon_source(std::string_view name) {
  if (name == "arxiv") return LexiconSource::arxiv;
  if (name == "wikipedia") return LexiconSource::wikipedia;
  if (name == "wikidata") return LexiconSource::wikidata;
  if (name == "custom") return LexiconSource::custom;
  throw Error(ErrorCode::invalid_argument, "unknown lexicon source '" + std::string(name) + "'");
}

std::string_view to_string(EnrichMode mode) {
  return mode == EnrichMode::append ? "append" : "replace";
}

EnrichMode parse_enrich_mode(std::string_view name) {
  if (name == "append") return EnrichMode::append;
  if (name == "replace") return EnrichMode::replace;
  throw Error(ErrorCode::invalid_argument, "unknown enrichment mode '" + std::string(name) + "'");
}

const std::vector<NameCandidate>* Lexicon::find(const std::string& symbol) const {
  const auto it = entries.find(symbol);
  return it == entries.end() ? nullptr : &it->second;
}

Lexicon parse_lexicon(std::string_view text, LexiconSource source) {
  Lexicon lexicon;
  lexicon.source = source;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }

    const auto fields = split_tabs(line);
    double score = 0.0;
    bool ok = fields.size() == 3 && !fields[0].empty() && !fields[1].empty();
    if (ok) {
      const auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), score);
      ok = ec == std::errc() && ptr == fields[2].data() + fields[2].size() && std::isfinite(score);
    }
    if (!ok)
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": expected symbol<TAB>name<TAB>score");

    auto& candidates = lexicon.entries[std::string(fields[0])];
    auto same = std::find_if(candidates.begin(), candidates.end(),
                             [&](const NameCandidate& c) { return c.name == fields[1]; });
    if (same != candidates.end()) {
      same->score += score;
    } else {
      candidates.push_back({std::string(fields[1]), score});
    }
    if (end == text.size()) break;
  }
  for (auto& [symbol, candidates] : lexicon.entries)
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const NameCandidate& a, const NameCandidate& b) { return a.score > b.score; });
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconSource source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str(), source);
}

EnrichedStream enrich(const Document& doc, const Lexicon& lexicon, const StopwordSet& stopwords,
                      std::size_t top_n, EnrichMode mode, EncodingContent math_content) {
  if (top_n < 1) throw Error(ErrorCode::invalid_argument, "top_n must be at least 1");
  EnrichedStream out;
  out.doc_id = doc.id;
  out.top_n = top_n;
  if (mode == EnrichMode::append) {
    out.tokens = doc.text_tokens;
    for (const auto& f : doc.formulas)
      for (const auto& id : f.identifiers) {
        auto names = candidate_tokens(lexicon, id, stopwords, top_n);
        out.tokens.insert(out.tokens.end(), names.begin(), names.end());
      }
  } else {
    out.tokens = enrich_stream(token_stream(doc, math_content), lexicon, stopwords, top_n);
  }
  return out;
}

TokenStream enrich_stream(const TokenStream& stream, const Lexicon& lexicon,
                          const StopwordSet& stopwords, std::size_t top_n) {
  if (top_n < 1) throw Error(ErrorCode::invalid_argument, "top_n must be at least 1");
  TokenStream out;
  out.reserve(stream.size());
  for (const auto& token : stream) {
    if (token.rfind("id:", 0) == 0) {
      const std::string symbol = token.substr(3);
      if (lexicon.find(symbol)) {
        auto names = candidate_tokens(lexicon, symbol, stopwords, top_n);
        out.insert(out.end(), names.begin(), names.end());
        continue;
      }
    }
    out.push_back(token);
  }
  return out;
}

}  // namespace mathenc
