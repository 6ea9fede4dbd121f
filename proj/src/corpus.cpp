#include "mathenc/corpus.hpp"

#include "mathenc/error.hpp"
#include "markup.hpp"
#include "utf8.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace mathenc {
namespace {

using detail::MarkupEvent;
using json = nlohmann::json;

bool is_void_element(std::string_view name) {
  static const std::set<std::string_view> names = {"area", "base", "br",   "col",   "embed",
                                                   "hr",   "img",  "input", "link", "meta",
                                                   "param", "source", "track", "wbr"};
  return names.count(name) > 0;
}

bool is_block_element(std::string_view name) {
  static const std::set<std::string_view> names = {
      "p",     "div",   "br",      "h1",     "h2",      "h3",       "h4",    "h5",
      "h6",    "li",    "ul",      "ol",     "tr",      "td",       "th",    "table",
      "title", "section", "article", "header", "footer", "blockquote", "pre", "head",
      "body",  "abstract", "figure", "caption", "dd",       "dt",    "hr"};
  return names.count(name) > 0;
}

bool is_skipped_element(std::string_view name) {
  return name == "script" || name == "style";
}

std::string trim(std::string_view s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto begin = std::find_if(s.begin(), s.end(), not_space);
  auto end = std::find_if(s.rbegin(), s.rend(), not_space).base();
  return begin < end ? std::string(begin, end) : std::string();
}

}  // namespace

std::vector<SubjectClass> Corpus::labels() const {
  std::vector<SubjectClass> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.label);
  return out;
}

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& d : documents) {
    if (!ids.insert(d.id).second) throw Error(ErrorCode::duplicate_id, d.id);
    if (std::find(label_set.begin(), label_set.end(), d.label) == label_set.end())
      throw Error(ErrorCode::unknown_label, d.label.name + " (document " + d.id + ")");
  }
}

Document parse_document(std::string_view raw_markup, MarkupFormat format, std::string id,
                        SubjectClass label, const StopwordSet& stopwords) {
  if (format != MarkupFormat::html_math && format != MarkupFormat::tei_formula)
    throw Error(ErrorCode::unknown_format, "format code " + std::to_string(static_cast<int>(format)));
  const bool html = format == MarkupFormat::html_math;
  const std::string_view container = html ? "math" : "formula";

  Document doc;
  doc.id = std::move(id);
  doc.label = std::move(label);

  std::vector<std::string> stack;
  std::size_t code_points = 0;
  std::size_t skip_depth = 0;

  bool in_formula = false;
  std::size_t formula_depth = 0;  // stack size just after the container was pushed
  Formula current;

  bool capturing = false;
  std::size_t capture_depth = 0;
  char capture_kind = 0;
  std::string capture_text;

  bool trailing_break = false;
  auto append_raw = [&](std::string_view text) {
    trailing_break = false;
    doc.raw_text.append(text);
    code_points += detail::utf8_length(text);
  };
  auto block_break = [&] {
    if (!doc.raw_text.empty() && !std::isspace(static_cast<unsigned char>(doc.raw_text.back()))) {
      append_raw("\n");
      trailing_break = true;
    }
  };
  auto finish_capture = [&] {
    std::string text = trim(capture_text);
    if (!text.empty()) {
      (capture_kind == 'o' ? current.operators : current.identifiers).push_back(std::move(text));
      current.order.push_back(capture_kind);
    }
    capturing = false;
    capture_text.clear();
  };
  auto open_formula = [&] {
    in_formula = true;
    current = Formula{};
    current.offset = code_points;
    std::string placeholder;
    detail::utf8_append(placeholder, kFormulaPlaceholder);
    append_raw(placeholder);
  };
  auto close_formula = [&] {
    doc.formulas.push_back(std::move(current));
    current = Formula{};
    in_formula = false;
  };

  for (auto& event : detail::tokenize_markup(raw_markup)) {
    switch (event.kind) {
      case MarkupEvent::Kind::start_tag: {
        const bool self_closing = event.self_closing || (html && is_void_element(event.name));
        if (skip_depth == 0 && !in_formula && is_block_element(event.name)) block_break();
        if (self_closing) {
          if (!in_formula && skip_depth == 0 && event.name == container) {
            open_formula();
            close_formula();
          }
          break;
        }
        stack.push_back(event.name);
        if (skip_depth > 0 || is_skipped_element(event.name)) {
          ++skip_depth;
        } else if (!in_formula && event.name == container) {
          open_formula();
          formula_depth = stack.size();
        } else if (in_formula && !capturing && (event.name == "mo" || event.name == "mi")) {
          capturing = true;
          capture_depth = stack.size();
          capture_kind = event.name == "mo" ? 'o' : 'i';
        }
        break;
      }
      case MarkupEvent::Kind::end_tag: {
        if (html && is_void_element(event.name)) break;
        if (stack.empty())
          throw Error(ErrorCode::malformed_markup, doc.id + ": unexpected </" + event.name + ">");
        if (stack.back() != event.name)
          throw Error(ErrorCode::malformed_markup,
                      doc.id + ": </" + event.name + "> closes <" + stack.back() + ">");
        const std::size_t depth = stack.size();
        stack.pop_back();
        if (skip_depth > 0) {
          --skip_depth;
          break;
        }
        if (capturing && depth == capture_depth) finish_capture();
        if (in_formula && depth == formula_depth) {
          close_formula();
        } else if (!in_formula && is_block_element(event.name)) {
          block_break();
        }
        break;
      }
      case MarkupEvent::Kind::text:
        if (skip_depth > 0) break;
        if (in_formula) {
          if (capturing) capture_text += event.text;
        } else {
          append_raw(event.text);
        }
        break;
    }
  }
  if (!stack.empty()) throw Error(ErrorCode::malformed_markup, doc.id + ": unclosed <" + stack.back() + ">");
  if (trailing_break) doc.raw_text.pop_back();

  doc.text_tokens = clean_text(doc.raw_text, stopwords);
  return doc;
}

std::vector<std::string> extract_surroundings(const Document& doc, const StopwordSet& stopwords,
                                              std::size_t window) {
  if (window == 0) throw Error(ErrorCode::invalid_argument, "surroundings window must be positive");
  std::vector<std::string> tokens;
  const std::u32string text = detail::utf8_decode(doc.raw_text);
  for (const auto& formula : doc.formulas) {
    if (formula.identifiers.empty()) continue;
    const std::size_t begin = formula.offset > window ? formula.offset - window : 0;
    const std::size_t end = std::min(text.size(), formula.offset + window + 1);
    if (begin >= end) continue;
    const auto part = clean_text(detail::utf8_encode(std::u32string_view(text).substr(begin, end - begin)),
                                 stopwords);
    tokens.insert(tokens.end(), part.begin(), part.end());
  }
  return tokens;
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::missing_file, manifest_path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_manifest, manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();

  Corpus corpus;
  MarkupFormat format;
  std::optional<std::size_t> per_class_limit;
  try {
    format = parse_markup_format(manifest.at("format").get<std::string>());
    for (const auto& l : manifest.at("label_set")) corpus.label_set.push_back({l.get<std::string>()});
    if (manifest.contains("per_class_limit") && !manifest["per_class_limit"].is_null())
      per_class_limit = manifest["per_class_limit"].get<std::size_t>();
    if (manifest.contains("granularity"))
      corpus.granularity = parse_granularity(manifest["granularity"].get<std::string>());
    if (manifest.contains("stopwords") && !manifest["stopwords"].is_null())
      corpus.stopwords = load_stopwords(base / manifest["stopwords"].get<std::string>());
    else
      corpus.stopwords = default_stopwords();
    if (!manifest.at("entries").is_array())
      throw Error(ErrorCode::invalid_manifest, "'entries' must be an array");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_manifest, manifest_path.string() + ": " + e.what());
  }
  if (corpus.label_set.empty()) throw Error(ErrorCode::invalid_manifest, "empty label_set");

  std::map<std::string, std::size_t> per_class;
  for (const auto& entry : manifest["entries"]) {
    std::string path_str, label_str, id;
    try {
      path_str = entry.at("path").get<std::string>();
      label_str = entry.at("label").get<std::string>();
      id = entry.contains("id") ? entry["id"].get<std::string>()
                                : std::filesystem::path(path_str).stem().string();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_manifest, std::string("entry: ") + e.what());
    }
    SubjectClass label{label_str};
    if (std::find(corpus.label_set.begin(), corpus.label_set.end(), label) == corpus.label_set.end())
      throw Error(ErrorCode::unknown_label, label_str + " (entry " + id + ")");
    if (per_class_limit && per_class[label_str] >= *per_class_limit) continue;

    const auto path = base / path_str;
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::missing_file, path.string());
    std::stringstream buffer;
    buffer << file.rdbuf();
    try {
      corpus.documents.push_back(parse_document(buffer.str(), format, id, label, corpus.stopwords));
      ++per_class[label_str];
    } catch (const Error& e) {
      if (e.code() != ErrorCode::malformed_markup) throw;
      std::cerr << "warning: skipping " << id << " (" << path.string() << "): " << e.what() << "\n";
      corpus.skipped.push_back({id, path.string(), e.what()});
    }
  }

  for (const auto& label : corpus.label_set)
    if (per_class[label.name] == 0) throw Error(ErrorCode::empty_class, label.name);
  corpus.validate();
  return corpus;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.documents) {
    json formulas = json::array();
    for (const auto& f : d.formulas)
      formulas.push_back({{"operators", f.operators},
                          {"identifiers", f.identifiers},
                          {"offset", f.offset},
                          {"order", f.order}});
    json obj = {{"id", d.id},
                {"label", d.label.name},
                {"text_tokens", d.text_tokens},
                {"formulas", std::move(formulas)},
                {"raw_text", d.raw_text}};
    out << obj.dump() << '\n';
  }
}

void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  write_corpus_jsonl(out, corpus);
}

Corpus read_corpus_jsonl(std::istream& in) {
  Corpus corpus;
  corpus.stopwords = default_stopwords();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json obj = json::parse(line);
      Document d;
      d.id = obj.at("id").get<std::string>();
      d.label = {obj.at("label").get<std::string>()};
      d.raw_text = obj.at("raw_text").get<std::string>();
      d.text_tokens = obj.at("text_tokens").get<std::vector<std::string>>();
      for (const auto& f : obj.at("formulas")) {
        Formula formula;
        formula.operators = f.at("operators").get<std::vector<std::string>>();
        formula.identifiers = f.at("identifiers").get<std::vector<std::string>>();
        formula.offset = f.at("offset").get<std::size_t>();
        if (f.contains("order")) {
          formula.order = f["order"].get<std::string>();
        } else {
          formula.order = std::string(formula.identifiers.size(), 'i') +
                          std::string(formula.operators.size(), 'o');
        }
        d.formulas.push_back(std::move(formula));
      }
      if (std::find(corpus.label_set.begin(), corpus.label_set.end(), d.label) ==
          corpus.label_set.end())
        corpus.label_set.push_back(d.label);
      corpus.documents.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::invalid_manifest,
                  "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  corpus.validate();
  return corpus;
}

Corpus read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, path.string());
  return read_corpus_jsonl(in);
}

}  // namespace mathenc
