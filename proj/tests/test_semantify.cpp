#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/error.hpp"
#include "mathenc/experiment.hpp"
#include "mathenc/semantify.hpp"

#include <doctest.h>

#include <filesystem>

using namespace mathenc;

namespace {

const StopwordSet& sw() { return default_stopwords(); }

Document doc(std::string_view markup) {
  return parse_document(markup, MarkupFormat::html_math, "d", {"physics"}, sw());
}

}  // namespace

TEST_CASE("lexicon parsing") {
  const Lexicon one = parse_lexicon("E\tenergy\t120\n");
  REQUIRE(one.find("E") != nullptr);
  CHECK(*one.find("E") == std::vector<NameCandidate>{{"energy", 120}});
  CHECK(one.find("m") == nullptr);

  const Lexicon sorted = parse_lexicon("x\tposition\t5\nx\tvariable\t9\n");
  CHECK(sorted.find("x")->at(0).name == "variable");
  CHECK(sorted.find("x")->at(1).name == "position");

  const Lexicon ties = parse_lexicon("x\tfirst\t3\nx\tsecond\t3\r\nx\tthird\t3\n");
  CHECK(ties.find("x")->at(0).name == "first");
  CHECK(ties.find("x")->at(2).name == "third");

  const Lexicon summed = parse_lexicon("# comment\n\nm\tmass\t2\nm\tmetric\t3\nm\tmass\t2.5\n");
  REQUIRE(summed.find("m")->size() == 2);
  CHECK(summed.find("m")->at(0) == NameCandidate{"mass", 4.5});

  try {
    parse_lexicon("E\tenergy\t1\nbroken\tline\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::malformed_line);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_lexicon("E\tenergy\tlots\n"), Error);
  CHECK_THROWS_AS(parse_lexicon("E\t\t1\n"), Error);
  CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.tsv"), Error);
}

TEST_CASE("bundled lexicons load and stay sorted") {
  for (const auto& [file, source] : std::vector<std::pair<std::string, LexiconSource>>{
           {"arxiv_sample.tsv", LexiconSource::arxiv},
           {"wikipedia_sample.tsv", LexiconSource::wikipedia},
           {"wikidata_sample.tsv", LexiconSource::wikidata}}) {
    CAPTURE(file);
    const Lexicon l = load_lexicon(std::filesystem::path(MATHENC_DATA_DIR) / "lexicons" / file, source);
    CHECK(l.source == source);
    CHECK(l.find("E") != nullptr);
    for (const auto& [symbol, candidates] : l.entries)
      for (std::size_t i = 1; i < candidates.size(); ++i) CHECK(candidates[i - 1].score >= candidates[i].score);
  }
}

TEST_CASE("append mode") {
  const Document d = doc("<p>Relativity <math><mi>E</mi><mo>=</mo><mi>m</mi></math></p>");
  const Lexicon lex = parse_lexicon("E\tenergy\t1\nm\tmass\t1\n");
  const EnrichedStream e = enrich(d, lex, sw(), 1, EnrichMode::append);
  CHECK(e.tokens == TokenStream{"relativity", "energy", "mass"});
  CHECK(e.doc_id == "d");
  CHECK(enrich(d, Lexicon{}, sw(), 3, EnrichMode::append).tokens == d.text_tokens);
}

TEST_CASE("top_n truncates to the available candidates") {
  const Document d = doc("<p><math><mi>c</mi></math></p>");
  const Lexicon lex = parse_lexicon("c\tspeed of light\t9\nc\tconstant\t4\n");
  CHECK(enrich(d, lex, sw(), 3, EnrichMode::append).tokens == TokenStream{"speed", "light", "constant"});
  CHECK(enrich(d, lex, sw(), 1, EnrichMode::append).tokens == TokenStream{"speed", "light"});
  CHECK_THROWS(enrich(d, lex, sw(), 0, EnrichMode::append));
}

TEST_CASE("replace mode and idempotence") {
  const Document d = doc("<p><math><mi>E</mi><mo>=</mo><mi>q</mi></math></p>");
  const Lexicon lex = parse_lexicon("E\tenergy\t1\n");
  const EnrichedStream e = enrich(d, lex, sw(), 3, EnrichMode::replace);
  CHECK(e.tokens == TokenStream{"energy", "op:=", "id:q"});
  CHECK(enrich_stream(e.tokens, lex, sw(), 3) == e.tokens);
}

TEST_CASE("append count and clean tokens invariants") {
  const SyntheticCorpus s = generate_synthetic_markup({.n_classes = 3, .docs_per_class = 5, .seed = 2});
  const Lexicon lex = synthetic_lexicon(s, 3, 1);
  for (const auto& sample : s.samples) {
    const Document d = parse_document(sample.markup, MarkupFormat::html_math, sample.id, {sample.label}, sw());
    const EnrichedStream e = enrich(d, lex, sw(), 2, EnrichMode::append);
    std::size_t added = 0;
    for (const auto& f : d.formulas)
      for (const auto& id : f.identifiers)
        if (const auto* c = lex.find(id))
          for (std::size_t i = 0; i < std::min<std::size_t>(2, c->size()); ++i) added += clean_text((*c)[i].name, sw()).size();
    CHECK(e.tokens.size() == d.text_tokens.size() + added);
    for (const auto& t : e.tokens) CHECK(clean_text(t, sw()) == TokenStream{t});
  }
}

TEST_CASE("semantified encoding content") {
  const Document d = doc("<p>Relativity <math><mi>E</mi></math></p>");
  const Lexicon lex = parse_lexicon("E\tenergy\t1\n");
  StreamOptions options;
  options.lexicon = &lex;
  CHECK(token_stream(d, EncodingContent::semantified, options) == TokenStream{"relativity", "energy"});
  options.enrich_mode = EnrichMode::replace;
  CHECK(token_stream(d, EncodingContent::semantified, options) == TokenStream{"energy"});
  CHECK_THROWS_AS(token_stream(d, EncodingContent::semantified, {}), Error);
}

TEST_CASE("enum names") {
  CHECK(parse_enrich_mode("replace") == EnrichMode::replace);
  CHECK(parse_lexicon_source("wikidata") == LexiconSource::wikidata);
  CHECK_THROWS_AS(parse_enrich_mode("merge"), Error);
}
