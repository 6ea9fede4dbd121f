#include "markup.hpp"

#include "mathenc/error.hpp"
#include "utf8.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <unordered_map>

namespace mathenc::detail {
namespace {

const std::unordered_map<std::string_view, char32_t>& named_entities() {
  // XML predefined entities plus the HTML/MathML names that LaTeXML output
  // commonly carries.
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", U'&'},         {"lt", U'<'},          {"gt", U'>'},
      {"quot", U'"'},        {"apos", U'\''},       {"nbsp", U'\u00A0'},
      {"minus", U'\u2212'},  {"times", U'\u00D7'},  {"sdot", U'\u22C5'},
      {"plusmn", U'\u00B1'}, {"le", U'\u2264'},     {"ge", U'\u2265'},
      {"ne", U'\u2260'},     {"sum", U'\u2211'},    {"prod", U'\u220F'},
      {"int", U'\u222B'},    {"infin", U'\u221E'},  {"part", U'\u2202'},
      {"nabla", U'\u2207'},  {"rarr", U'\u2192'},   {"larr", U'\u2190'},
      {"equiv", U'\u2261'},  {"asymp", U'\u2248'},  {"prop", U'\u221D'},
      {"isin", U'\u2208'},   {"alpha", U'\u03B1'},  {"beta", U'\u03B2'},
      {"gamma", U'\u03B3'},  {"delta", U'\u03B4'},  {"epsilon", U'\u03B5'},
      {"theta", U'\u03B8'},  {"lambda", U'\u03BB'}, {"mu", U'\u03BC'},
      {"pi", U'\u03C0'},     {"sigma", U'\u03C3'},  {"tau", U'\u03C4'},
      {"phi", U'\u03C6'},    {"omega", U'\u03C9'},  {"Gamma", U'\u0393'},
      {"Delta", U'\u0394'},  {"Sigma", U'\u03A3'},  {"Omega", U'\u03A9'},
      {"InvisibleTimes", U'\u2062'},  {"ApplyFunction", U'\u2061'},
      {"InvisibleComma", U'\u2063'},
  };
  return table;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

std::string local_name(std::string_view qualified) {
  const auto colon = qualified.rfind(':');
  if (colon != std::string_view::npos) qualified.remove_prefix(colon + 1);
  std::string out(qualified);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void malformed(std::string_view what, std::size_t pos) {
  throw Error(ErrorCode::malformed_markup, std::string(what) + " at byte " + std::to_string(pos));
}

// Finds the closing '>' of a tag, skipping quoted attribute values.
std::size_t find_tag_end(std::string_view s, std::size_t pos) {
  char quote = 0;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return pos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '&') {
      out.push_back(c);
      ++i;
      continue;
    }
    const auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 32) {
      out.push_back(c);
      ++i;
      continue;
    }
    const std::string_view body = text.substr(i + 1, semi - i - 1);
    bool decoded = false;
    if (body.size() > 1 && body[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      const auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() &&
          cp <= 0x10FFFF) {
        utf8_append(out, static_cast<char32_t>(cp));
        decoded = true;
      }
    } else {
      const auto& table = named_entities();
      if (auto it = table.find(body); it != table.end()) {
        utf8_append(out, it->second);
        decoded = true;
      }
    }
    if (decoded) {
      i = semi + 1;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::vector<MarkupEvent> tokenize_markup(std::string_view s) {
  std::vector<MarkupEvent> events;
  std::size_t i = 0;
  auto emit_text = [&](std::string text) {
    if (text.empty()) return;
    if (!events.empty() && events.back().kind == MarkupEvent::Kind::text) {
      events.back().text += text;
    } else {
      MarkupEvent e;
      e.kind = MarkupEvent::Kind::text;
      e.text = std::move(text);
      events.push_back(std::move(e));
    }
  };

  while (i < s.size()) {
    const auto lt = s.find('<', i);
    if (lt == std::string_view::npos) {
      emit_text(decode_entities(s.substr(i)));
      break;
    }
    if (lt > i) emit_text(decode_entities(s.substr(i, lt - i)));
    i = lt;

    if (s.compare(i, 4, "<!--") == 0) {
      const auto end = s.find("-->", i + 4);
      if (end == std::string_view::npos) malformed("unterminated comment", i);
      i = end + 3;
      continue;
    }
    if (s.compare(i, 9, "<![CDATA[") == 0) {
      const auto end = s.find("]]>", i + 9);
      if (end == std::string_view::npos) malformed("unterminated CDATA section", i);
      emit_text(std::string(s.substr(i + 9, end - i - 9)));
      i = end + 3;
      continue;
    }
    if (s.compare(i, 2, "<?") == 0) {
      const auto end = s.find("?>", i + 2);
      if (end == std::string_view::npos) malformed("unterminated processing instruction", i);
      i = end + 2;
      continue;
    }
    if (s.compare(i, 2, "<!") == 0) {
      const auto end = find_tag_end(s, i + 2);
      if (end == std::string_view::npos) malformed("unterminated declaration", i);
      i = end + 1;
      continue;
    }

    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t name_begin = i + (closing ? 2 : 1);
    std::size_t name_end = name_begin;
    while (name_end < s.size() && is_name_char(s[name_end])) ++name_end;
    if (name_end == name_begin) {
      // A bare '<' in text, as sloppy HTML sometimes has.
      emit_text("<");
      ++i;
      continue;
    }
    const auto end = find_tag_end(s, name_end);
    if (end == std::string_view::npos) malformed("unterminated tag", i);

    MarkupEvent e;
    e.kind = closing ? MarkupEvent::Kind::end_tag : MarkupEvent::Kind::start_tag;
    e.name = local_name(s.substr(name_begin, name_end - name_begin));
    if (!closing) {
      std::size_t back = end;
      while (back > name_end && std::isspace(static_cast<unsigned char>(s[back - 1]))) --back;
      e.self_closing = back > name_end && s[back - 1] == '/';
    }
    events.push_back(std::move(e));
    i = end + 1;
  }
  return events;
}

}  // namespace mathenc::detail
