#include "mathenc/encode.hpp"

#include "mathenc/error.hpp"
#include "mathenc/random.hpp"
#include "mathenc/semantify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mathenc {
namespace {

using json = nlohmann::json;

constexpr std::pair<EncodingContent, std::string_view> kContentNames[] = {
    {EncodingContent::text, "text"},
    {EncodingContent::math_op, "math_op"},
    {EncodingContent::math_id, "math_id"},
    {EncodingContent::math_opid, "math_opid"},
    {EncodingContent::math_surroundings, "math_surroundings"},
    {EncodingContent::textmath_opid, "textmath_opid"},
    {EncodingContent::textmath_surroundings, "textmath_surroundings"},
    {EncodingContent::semantified, "semantified"},
};

std::string_view table_part(EncodingContent content) {
  switch (content) {
    case EncodingContent::text: return "Text";
    case EncodingContent::math_op: return "Math_op";
    case EncodingContent::math_id: return "Math_id";
    case EncodingContent::math_opid: return "Math_opid";
    case EncodingContent::math_surroundings: return "Math_surroundings";
    case EncodingContent::textmath_opid: return "TextMath_opid";
    case EncodingContent::textmath_surroundings: return "TextMath_surroundings";
    case EncodingContent::semantified: return "Math_semantified";
  }
  return "Text";
}

std::string_view granularity_prefix(Granularity g) {
  switch (g) {
    case Granularity::document: return "doc";
    case Granularity::section: return "sec";
    case Granularity::abstract: return "abs";
  }
  return "doc";
}

bool is_textmath(EncodingContent c) {
  return c == EncodingContent::textmath_opid || c == EncodingContent::textmath_surroundings;
}

void append_prefixed(TokenStream& out, const std::vector<std::string>& tokens, std::string_view prefix) {
  for (const auto& t : tokens) out.push_back(std::string(prefix) + t);
}

TokenStream opid_stream(const Document& doc) {
  TokenStream out;
  for (const auto& f : doc.formulas) {
    if (f.order.size() == f.operators.size() + f.identifiers.size()) {
      std::size_t o = 0, i = 0;
      for (char kind : f.order) {
        if (kind == 'o' && o < f.operators.size()) {
          out.push_back("op:" + f.operators[o++]);
        } else if (i < f.identifiers.size()) {
          out.push_back("id:" + f.identifiers[i++]);
        }
      }
    } else {
      append_prefixed(out, f.identifiers, "id:");
      append_prefixed(out, f.operators, "op:");
    }
  }
  return out;
}

json spec_to_json(const EncodingSpec& spec) {
  const auto& p = spec.embedding;
  return {{"name", spec.name()},
          {"content", to_string(spec.content)},
          {"method", to_string(spec.method)},
          {"concatenate_vectors", spec.concatenate_vectors},
          {"embedding",
           {{"size", p.size},
            {"window", p.window},
            {"min_count", p.min_count},
            {"initial_alpha", p.initial_alpha},
            {"min_alpha", p.min_alpha},
            {"iters_per_epoch", p.iters_per_epoch},
            {"epochs", p.epochs},
            {"alpha_decay_per_epoch", p.alpha_decay_per_epoch},
            {"negative", p.negative},
            {"seed", p.seed}}}};
}

EncodingSpec spec_from_json(const json& j) {
  EncodingSpec spec = parse_encoding_spec(j.at("name").get<std::string>());
  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    auto& p = spec.embedding;
    p.size = e.value("size", p.size);
    p.window = e.value("window", p.window);
    p.min_count = e.value("min_count", p.min_count);
    p.initial_alpha = e.value("initial_alpha", p.initial_alpha);
    p.min_alpha = e.value("min_alpha", p.min_alpha);
    p.iters_per_epoch = e.value("iters_per_epoch", p.iters_per_epoch);
    p.epochs = e.value("epochs", p.epochs);
    p.alpha_decay_per_epoch = e.value("alpha_decay_per_epoch", p.alpha_decay_per_epoch);
    p.negative = e.value("negative", p.negative);
    p.seed = e.value("seed", p.seed);
  }
  return spec;
}

std::vector<TokenStream> select(const std::vector<TokenStream>& all, std::span<const std::size_t> rows) {
  std::vector<TokenStream> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(all.at(r));
  return out;
}

std::vector<std::string> select_ids(const std::vector<std::string>& all,
                                    std::span<const std::size_t> rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(all.at(r));
  return out;
}

std::pair<Matrix, Matrix> embed_split(const EmbeddingParams& params,
                                      const std::vector<TokenStream>& train,
                                      const std::vector<TokenStream>& test) {
  const EmbeddingModel model = train_embedding(train, params);
  Matrix train_x = model.doc_vectors;
  Matrix test_x(static_cast<Eigen::Index>(test.size()), params.size);
  for (std::size_t i = 0; i < test.size(); ++i)
    test_x.row(static_cast<Eigen::Index>(i)) = infer_doc_vector(model, test[i]).transpose();
  return {std::move(train_x), std::move(test_x)};
}

}  // namespace

std::string_view to_string(EncodingContent content) {
  for (const auto& [c, name] : kContentNames)
    if (c == content) return name;
  return "text";
}

std::string_view to_string(EncodingMethod method) {
  return method == EncodingMethod::tfidf ? "tfidf" : "embedding";
}

EncodingContent parse_encoding_content(std::string_view name) {
  for (const auto& [c, n] : kContentNames)
    if (n == name) return c;
  throw Error(ErrorCode::invalid_argument, "unknown encoding content '" + std::string(name) + "'");
}

std::string EncodingSpec::name() const {
  std::string out = std::string(to_string(content)) + "_" + std::string(to_string(method));
  if (concatenate_vectors) out += "+concat";
  return out;
}

std::string EncodingSpec::label(Granularity granularity) const {
  std::string out(granularity_prefix(granularity));
  if (method == EncodingMethod::embedding) {
    out += "2vec";
    out += table_part(content);
    if (concatenate_vectors) out += "_concat";
  } else {
    out += table_part(content);
    out += "_tfidf";
  }
  return out;
}

bool EncodingSpec::is_math() const {
  return content == EncodingContent::math_op || content == EncodingContent::math_id ||
         content == EncodingContent::math_opid || content == EncodingContent::math_surroundings;
}

EncodingSpec parse_encoding_spec(std::string_view name) {
  EncodingSpec spec;
  constexpr std::string_view concat = "+concat";
  if (name.size() > concat.size() && name.substr(name.size() - concat.size()) == concat) {
    spec.concatenate_vectors = true;
    name.remove_suffix(concat.size());
  }
  const auto sep = name.rfind('_');
  if (sep == std::string_view::npos)
    throw Error(ErrorCode::invalid_argument, "encoding name '" + std::string(name) +
                                                 "' must look like <content>_<tfidf|embedding>");
  const auto method = name.substr(sep + 1);
  if (method == "tfidf") {
    spec.method = EncodingMethod::tfidf;
  } else if (method == "embedding") {
    spec.method = EncodingMethod::embedding;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown encoding method '" + std::string(method) + "'");
  }
  spec.content = parse_encoding_content(name.substr(0, sep));
  if (spec.concatenate_vectors &&
      (spec.method != EncodingMethod::embedding || !is_textmath(spec.content)))
    throw Error(ErrorCode::invalid_argument,
                "+concat applies only to textmath_* embedding encodings");
  return spec;
}

const StopwordSet& StreamOptions::stopword_set() const {
  return stopwords ? *stopwords : default_stopwords();
}

TokenStream token_stream(const Document& doc, EncodingContent content, const StreamOptions& options) {
  TokenStream out;
  switch (content) {
    case EncodingContent::text:
      return doc.text_tokens;
    case EncodingContent::math_op:
      for (const auto& f : doc.formulas) append_prefixed(out, f.operators, "op:");
      return out;
    case EncodingContent::math_id:
      for (const auto& f : doc.formulas) append_prefixed(out, f.identifiers, "id:");
      return out;
    case EncodingContent::math_opid:
      return opid_stream(doc);
    case EncodingContent::math_surroundings:
      return extract_surroundings(doc, options.stopword_set(), options.surroundings_window);
    case EncodingContent::textmath_opid: {
      out = doc.text_tokens;
      const auto math = opid_stream(doc);
      out.insert(out.end(), math.begin(), math.end());
      return out;
    }
    case EncodingContent::textmath_surroundings: {
      out = doc.text_tokens;
      const auto sur = extract_surroundings(doc, options.stopword_set(), options.surroundings_window);
      out.insert(out.end(), sur.begin(), sur.end());
      return out;
    }
    case EncodingContent::semantified:
      if (!options.lexicon)
        throw Error(ErrorCode::invalid_argument, "semantified encoding needs a lexicon");
      return enrich(doc, *options.lexicon, options.stopword_set(), options.top_n,
                    options.enrich_mode, EncodingContent::math_opid)
          .tokens;
  }
  return out;
}

void EncodedMatrix::validate() const {
  if (static_cast<std::size_t>(features.rows()) != sample_ids.size())
    throw Error(ErrorCode::dimension_mismatch, "row count differs from sample id count");
  if (feature_names && static_cast<std::size_t>(features.cols()) != feature_names->size())
    throw Error(ErrorCode::dimension_mismatch, "column count differs from feature name count");
  if (!features.allFinite())
    throw Error(ErrorCode::degenerate_input, "encoded matrix contains NaN or Inf");
}

TfidfModel fit_tfidf(const std::vector<TokenStream>& bags) {
  if (bags.empty()) throw Error(ErrorCode::invalid_argument, "fit_tfidf needs at least one bag");
  std::map<std::string, std::size_t> df;
  for (const auto& bag : bags) {
    std::vector<std::string> unique(bag.begin(), bag.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& t : unique) ++df[t];
  }
  if (df.empty()) throw Error(ErrorCode::all_bags_empty, std::to_string(bags.size()) + " bags");

  TfidfModel model;
  model.n_docs_fitted = bags.size();
  model.idf.resize(static_cast<Eigen::Index>(df.size()));
  const double n = static_cast<double>(bags.size());
  Eigen::Index col = 0;
  for (const auto& [token, count] : df) {
    model.feature_names.push_back(token);
    model.vocabulary.emplace(token, col);
    model.idf(col) = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    ++col;
  }
  return model;
}

Matrix transform_tfidf(const TfidfModel& model, const std::vector<TokenStream>& bags) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(bags.size()), model.idf.size());
  for (std::size_t r = 0; r < bags.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (const auto& token : bags[r]) {
      if (auto it = model.vocabulary.find(token); it != model.vocabulary.end()) out(row, it->second) += 1.0;
    }
    out.row(row).array() *= model.idf.transpose().array();
    const double norm = out.row(row).norm();
    if (norm > 0.0) out.row(row) /= norm;
  }
  return out;
}

EncodingInput prepare_encoding_input(const EncodingSpec& spec, const std::vector<Document>& docs,
                                     const StreamOptions& options) {
  EncodingInput input;
  input.ids.reserve(docs.size());
  for (const auto& d : docs) input.ids.push_back(d.id);
  const bool split = spec.concatenate_vectors && spec.method == EncodingMethod::embedding &&
                     is_textmath(spec.content);
  for (const auto& d : docs) {
    if (split) {
      input.primary.push_back(token_stream(d, EncodingContent::text, options));
      input.secondary.push_back(token_stream(
          d,
          spec.content == EncodingContent::textmath_opid ? EncodingContent::math_opid
                                                         : EncodingContent::math_surroundings,
          options));
    } else {
      input.primary.push_back(token_stream(d, spec.content, options));
    }
  }
  return input;
}

SplitEncoding encode_split(const EncodingSpec& spec, const EncodingInput& input,
                           std::span<const std::size_t> train, std::span<const std::size_t> test) {
  SplitEncoding out;
  out.train.spec = out.test.spec = spec;
  out.train.sample_ids = select_ids(input.ids, train);
  out.test.sample_ids = select_ids(input.ids, test);

  const auto train_streams = select(input.primary, train);
  const auto test_streams = select(input.primary, test);
  if (spec.method == EncodingMethod::tfidf) {
    const TfidfModel model = fit_tfidf(train_streams);
    out.train.features = transform_tfidf(model, train_streams);
    out.test.features = transform_tfidf(model, test_streams);
    out.train.feature_names = out.test.feature_names = model.feature_names;
  } else {
    auto [a_train, a_test] = embed_split(spec.embedding, train_streams, test_streams);
    if (input.secondary.empty()) {
      out.train.features = std::move(a_train);
      out.test.features = std::move(a_test);
    } else {
      EmbeddingParams math_params = spec.embedding;
      math_params.seed = derive_seed(spec.embedding.seed, 1);
      auto [b_train, b_test] =
          embed_split(math_params, select(input.secondary, train), select(input.secondary, test));
      out.train.features.resize(a_train.rows(), a_train.cols() + b_train.cols());
      out.train.features << a_train, b_train;
      out.test.features.resize(a_test.rows(), a_test.cols() + b_test.cols());
      out.test.features << a_test, b_test;
    }
  }
  out.train.validate();
  out.test.validate();
  return out;
}

EncodedMatrix encode_all(const EncodingSpec& spec, const EncodingInput& input) {
  std::vector<std::size_t> all(input.ids.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return encode_split(spec, input, all, {}).train;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

void write_encoded_matrix(const EncodedMatrix& m, const std::filesystem::path& csv_path) {
  m.validate();
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + csv_path.string());
  out << "sample_id";
  for (Eigen::Index c = 0; c < m.cols(); ++c) out << ",f" << c;
  out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << m.sample_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m.features(r, c));
      out << ',' << buf;
    }
    out << '\n';
  }

  json side = {{"spec", spec_to_json(m.spec)}, {"rows", m.rows()}, {"cols", m.cols()}};
  if (m.feature_names) side["feature_names"] = *m.feature_names;
  std::ofstream sidecar(sidecar_path(csv_path), std::ios::binary);
  if (!sidecar) throw Error(ErrorCode::io_error, "cannot write " + sidecar_path(csv_path).string());
  sidecar << side.dump(2) << '\n';
}

EncodedMatrix read_encoded_matrix(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::missing_file, csv_path.string());
  std::ifstream sidecar(sidecar_path(csv_path), std::ios::binary);
  if (!sidecar) throw Error(ErrorCode::missing_file, sidecar_path(csv_path).string());
  json side;
  sidecar >> side;

  EncodedMatrix m;
  m.spec = spec_from_json(side.at("spec"));
  if (side.contains("feature_names"))
    m.feature_names = side["feature_names"].get<std::vector<std::string>>();

  std::string line;
  std::getline(in, line);
  const auto cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    m.sample_ids.push_back(cell);
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
    if (static_cast<Eigen::Index>(values.size()) != cols)
      throw Error(ErrorCode::dimension_mismatch, "ragged row in " + csv_path.string());
    rows.push_back(std::move(values));
  }
  m.features.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      m.features(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  m.validate();
  return m;
}

}  // namespace mathenc
