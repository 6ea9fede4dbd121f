#include "mathenc/error.hpp"
#include "mathenc/experiment.hpp"
#include "mathenc/random.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace mathenc {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
const std::vector<std::string> kOperators = {"+", "-", "=", "<", ">", "*", "/", "^"};

std::string pseudo_word(Rng& rng) {
  std::string w;
  const std::size_t syllables = 2 + rng.index(2);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kConsonants[rng.index(kConsonants.size())];
    w += kVowels[rng.index(kVowels.size())];
  }
  return w;
}

std::string identifier_symbol(int i) {
  if (i < 26) return std::string(1, static_cast<char>('a' + i));
  if (i < 52) return std::string(1, static_cast<char>('A' + i - 26));
  return "v" + std::to_string(i - 51);
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void require_positive(int value, const char* name) {
  if (value < 1) throw Error(ErrorCode::invalid_argument, std::string(name) + " must be at least 1");
}

}  // namespace

SyntheticCorpus generate_synthetic_markup(const SyntheticOptions& o) {
  require_positive(o.n_classes, "n_classes");
  require_positive(o.docs_per_class, "docs_per_class");
  require_positive(o.vocab_per_class, "vocab_per_class");
  require_positive(o.shared_identifiers, "shared_identifiers");
  require_positive(o.words_per_doc, "words_per_doc");
  require_positive(o.identifiers_per_formula, "identifiers_per_formula");
  if (o.formulas_per_doc < 0) throw Error(ErrorCode::invalid_argument, "formulas_per_doc must be >= 0");

  SyntheticCorpus out;
  const auto& defaults = default_label_set();
  for (int c = 0; c < o.n_classes; ++c)
    out.labels.push_back(c < static_cast<int>(defaults.size()) ? defaults[static_cast<std::size_t>(c)].name
                                                              : "class-" + std::to_string(c + 1));
  for (int i = 0; i < o.shared_identifiers; ++i) out.identifiers.push_back(identifier_symbol(i));

  Rng vocab_rng(derive_seed(o.seed, 0));
  const auto& stopwords = default_stopwords();
  std::set<std::string> used;
  for (int c = 0; c < o.n_classes; ++c) {
    auto& vocab = out.class_vocabularies.emplace_back();
    while (static_cast<int>(vocab.size()) < o.vocab_per_class) {
      std::string w = pseudo_word(vocab_rng);
      if (stopwords.count(w) || !used.insert(w).second) continue;
      vocab.push_back(std::move(w));
    }
  }

  Rng rng(derive_seed(o.seed, 1));
  for (int c = 0; c < o.n_classes; ++c) {
    const auto& vocab = out.class_vocabularies[static_cast<std::size_t>(c)];
    const std::string& favourite = kOperators[static_cast<std::size_t>(c) % kOperators.size()];
    for (int d = 0; d < o.docs_per_class; ++d) {
      std::vector<std::size_t> slots;
      for (int f = 0; f < o.formulas_per_doc; ++f) slots.push_back(rng.index(static_cast<std::size_t>(o.words_per_doc) + 1));
      std::sort(slots.begin(), slots.end());

      std::ostringstream markup;
      markup << "<html><body><p>";
      std::size_t next_slot = 0;
      for (int w = 0; w <= o.words_per_doc; ++w) {
        while (next_slot < slots.size() && slots[next_slot] == static_cast<std::size_t>(w)) {
          markup << "<math>";
          for (int k = 0; k < o.identifiers_per_formula; ++k) {
            if (k > 0) {
              const bool skewed = o.class_skewed_operators && rng.uniform() < 0.5;
              const std::string& op = skewed ? favourite : kOperators[rng.index(kOperators.size())];
              markup << "<mo>" << xml_escape(op) << "</mo>";
            }
            markup << "<mi>" << out.identifiers[rng.index(out.identifiers.size())] << "</mi>";
          }
          markup << "</math> ";
          ++next_slot;
        }
        if (w == o.words_per_doc) break;
        if (w > 0 && w % 40 == 0) markup << "</p><p>";
        markup << vocab[rng.index(vocab.size())] << ' ';
      }
      markup << "</p></body></html>\n";

      char id[64];
      std::snprintf(id, sizeof id, "c%02d-d%04d", c, d);
      out.samples.push_back({id, out.labels[static_cast<std::size_t>(c)], markup.str()});
    }
  }
  return out;
}

Corpus generate_synthetic_corpus(const SyntheticOptions& options) {
  const SyntheticCorpus synthetic = generate_synthetic_markup(options);
  Corpus corpus;
  corpus.stopwords = default_stopwords();
  for (const auto& l : synthetic.labels) corpus.label_set.push_back({l});
  for (const auto& s : synthetic.samples)
    corpus.documents.push_back(parse_document(s.markup, MarkupFormat::html_math, s.id, {s.label}, corpus.stopwords));
  corpus.validate();
  return corpus;
}

Corpus generate_synthetic_corpus(int n_classes, int docs_per_class, int vocab_per_class,
                                 int shared_identifiers, std::uint64_t seed) {
  SyntheticOptions o;
  o.n_classes = n_classes;
  o.docs_per_class = docs_per_class;
  o.vocab_per_class = vocab_per_class;
  o.shared_identifiers = shared_identifiers;
  o.seed = seed;
  return generate_synthetic_corpus(o);
}

Lexicon synthetic_lexicon(const SyntheticCorpus& synthetic, int names_per_identifier, std::uint64_t seed) {
  require_positive(names_per_identifier, "names_per_identifier");
  Lexicon lexicon;
  lexicon.source = LexiconSource::custom;
  Rng rng(derive_seed(seed, 2));
  const std::size_t n_classes = synthetic.class_vocabularies.size();
  for (std::size_t i = 0; i < synthetic.identifiers.size(); ++i) {
    const auto& vocab = synthetic.class_vocabularies[i % n_classes];
    auto& candidates = lexicon.entries[synthetic.identifiers[i]];
    std::vector<std::string> pool = vocab;
    rng.shuffle(pool);
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(names_per_identifier), pool.size());
    for (std::size_t r = 0; r < n; ++r)
      candidates.push_back({pool[r], static_cast<double>(100 * (n - r))});
  }
  return lexicon;
}

std::string lexicon_tsv(const Lexicon& lexicon) {
  std::ostringstream out;
  for (const auto& [symbol, candidates] : lexicon.entries)
    for (const auto& c : candidates) {
      char score[32];
      std::snprintf(score, sizeof score, "%.17g", c.score);
      out << symbol << '\t' << c.name << '\t' << score << '\n';
    }
  return out.str();
}

}  // namespace mathenc
