#include "mathenc/corpus.hpp"
#include "mathenc/error.hpp"
#include "utf8.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>
#include <sstream>

namespace mathenc {

namespace detail {
extern const char* const kStopwordsText;

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf8_encode(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) utf8_append(out, cp);
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace detail

namespace {

StopwordSet parse_stopwords(std::istream& in) {
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  return words;
}

bool is_token_char(UChar32 c) { return u_isalpha(c) || u_isdigit(c) || c == '_'; }

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet words = [] {
    std::istringstream in(detail::kStopwordsText);
    return parse_stopwords(in);
  }();
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::missing_file, path.string());
  return parse_stopwords(in);
}

const std::vector<SubjectClass>& default_label_set() {
  static const std::vector<SubjectClass> labels = {
      {"hep-ph"}, {"astro-ph"}, {"quant-ph"}, {"physics"}, {"cond-mat"}, {"hep-ex"}, {"hep-lat"},
      {"nucl-th"}, {"nucl-ex"}, {"hep-th"}, {"math"}, {"gr-qc"}, {"nlin"}, {"cs"}};
  return labels;
}

MarkupFormat parse_markup_format(std::string_view name) {
  if (name == "html_math") return MarkupFormat::html_math;
  if (name == "tei_formula") return MarkupFormat::tei_formula;
  throw Error(ErrorCode::unknown_format, std::string(name));
}

std::string_view to_string(MarkupFormat format) {
  return format == MarkupFormat::html_math ? "html_math" : "tei_formula";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "document") return Granularity::document;
  if (name == "section") return Granularity::section;
  if (name == "abstract") return Granularity::abstract;
  throw Error(ErrorCode::invalid_argument, "unknown granularity '" + std::string(name) + "'");
}

std::string_view to_string(Granularity granularity) {
  switch (granularity) {
    case Granularity::document: return "document";
    case Granularity::section: return "section";
    case Granularity::abstract: return "abstract";
  }
  return "document";
}

std::vector<std::string> clean_text(std::string_view raw, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  if (raw.empty()) return tokens;

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  if (U_SUCCESS(status)) {
    icu::UnicodeString normalized = nfc->normalize(text, status);
    if (U_SUCCESS(status)) text = std::move(normalized);
  }

  const icu::Locale& root = icu::Locale::getRoot();
  auto flush = [&](int32_t begin, int32_t end) {
    if (begin >= end) return;
    icu::UnicodeString token(text, begin, end - begin);
    token.toLower(root);
    if (token.countChar32() < 3) return;
    for (int32_t i = 0; i < token.length(); i = token.moveIndex32(i, 1)) {
      if (u_isdigit(token.char32At(i))) return;
    }
    std::string utf8;
    token.toUTF8String(utf8);
    if (stopwords.count(utf8)) return;
    tokens.push_back(std::move(utf8));
  };

  int32_t start = -1;
  int32_t i = 0;
  while (i < text.length()) {
    const UChar32 c = text.char32At(i);
    const int32_t next = text.moveIndex32(i, 1);
    if (is_token_char(c)) {
      if (start < 0) start = i;
    } else if (start >= 0) {
      flush(start, i);
      start = -1;
    }
    i = next;
  }
  if (start >= 0) flush(start, text.length());
  return tokens;
}

}  // namespace mathenc
