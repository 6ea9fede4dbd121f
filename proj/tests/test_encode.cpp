#include "mathenc/corpus.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/error.hpp"
#include "mathenc/pca.hpp"
#include "mathenc/random.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

using namespace mathenc;
using Bags = std::vector<TokenStream>;

namespace {

Document parse_html(std::string_view markup) {
  return parse_document(markup, MarkupFormat::html_math, "d", {"math"}, default_stopwords());
}

// Count loop plus the smoothed idf formula, with nothing shared with the
// library beyond the column order convention.
Matrix naive_tfidf(const Bags& bags) {
  std::set<std::string> vocab;
  for (const auto& b : bags) vocab.insert(b.begin(), b.end());
  const std::vector<std::string> columns(vocab.begin(), vocab.end());
  const double n = static_cast<double>(bags.size());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(bags.size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    double df = 0;
    for (const auto& b : bags) df += std::find(b.begin(), b.end(), columns[c]) != b.end();
    const double idf = std::log((1 + n) / (1 + df)) + 1;
    for (std::size_t r = 0; r < bags.size(); ++r) {
      double count = 0;
      for (const auto& t : bags[r]) count += t == columns[c];
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = count * idf;
    }
  }
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double norm = 0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) norm += out(r, c) * out(r, c);
    if (norm > 0) out.row(r) /= std::sqrt(norm);
  }
  return out;
}

}  // namespace

TEST_CASE("idf of the two-bag fixture") {
  const TfidfModel m = fit_tfidf({{"alpha", "beta", "alpha"}, {"alpha", "gamma"}});
  REQUIRE(m.feature_names == std::vector<std::string>{"alpha", "beta", "gamma"});
  CHECK(m.idf(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.idf(1) == doctest::Approx(1.405465).epsilon(1e-6));
  CHECK(m.idf(2) == doctest::Approx(std::log(1.5) + 1).epsilon(1e-12));
  CHECK(m.n_docs_fitted == 2);
}

TEST_CASE("tf-idf transform matches hand computation") {
  const TfidfModel m = fit_tfidf({{"alpha", "beta", "alpha"}, {"alpha", "gamma"}});
  const Matrix x = transform_tfidf(m, {{"alpha", "beta", "alpha"}, {}, {"unseen", "tokens"}});
  CHECK(x(0, 0) == doctest::Approx(0.8181802).epsilon(1e-7));
  CHECK(x(0, 1) == doctest::Approx(0.5749619).epsilon(1e-7));
  CHECK(x(0, 2) == 0.0);
  CHECK(x.row(1).isZero(0));
  CHECK(x.row(2).isZero(0));
}

TEST_CASE("idf edge cases") {
  const TfidfModel single = fit_tfidf({{"a1", "b1", "b1"}});
  CHECK((single.idf.array() == 1.0).all());
  const TfidfModel every = fit_tfidf({{"x", "y"}, {"x"}, {"x", "z"}});
  CHECK(every.idf(0) == 1.0);
  CHECK((every.idf.array() >= 1.0).all());
  CHECK_THROWS_AS(fit_tfidf({{}, {}}), Error);
  CHECK_THROWS_AS(fit_tfidf({}), Error);
}

TEST_CASE("tf-idf equals the naive reference on random small corpora") {
  Rng rng(3);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 200; ++trial) {
    Bags bags(1 + rng.index(10));
    for (auto& b : bags)
      for (std::size_t t = rng.index(11); t > 0; --t) b.push_back(pool[rng.index(pool.size())]);
    bool any = false;
    for (const auto& b : bags) any = any || !b.empty();
    if (!any) bags[0].push_back("a");
    const TfidfModel m = fit_tfidf(bags);
    const Matrix got = transform_tfidf(m, bags);
    const Matrix want = naive_tfidf(bags);
    REQUIRE(got.rows() == want.rows());
    REQUIRE(got.cols() == want.cols());
    CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
    for (Eigen::Index r = 0; r < got.rows(); ++r) {
      const double n = got.row(r).norm();
      CHECK((n == 0.0 || std::abs(n - 1.0) < 1e-9));
    }
  }
}

TEST_CASE("token streams") {
  const Document d = parse_html("<p>Kinetic energy <math><mi>x</mi><mo>=</mo><mi>y</mi></math> and "
                                "<math><mo>+</mo><mi>z</mi></math> formula</p>");
  CHECK(token_stream(d, EncodingContent::math_opid) ==
        TokenStream{"id:x", "op:=", "id:y", "op:+", "id:z"});
  CHECK(token_stream(d, EncodingContent::math_op) == TokenStream{"op:=", "op:+"});
  CHECK(token_stream(d, EncodingContent::math_id) == TokenStream{"id:x", "id:y", "id:z"});
  CHECK(token_stream(d, EncodingContent::text) == d.text_tokens);
  TokenStream combined = token_stream(d, EncodingContent::text);
  const auto opid = token_stream(d, EncodingContent::math_opid);
  combined.insert(combined.end(), opid.begin(), opid.end());
  CHECK(token_stream(d, EncodingContent::textmath_opid) == combined);
  for (const auto& t : d.text_tokens) CHECK(t.find(':') == std::string::npos);

  const Document plain = parse_html("<p>no formulas at all</p>");
  CHECK(token_stream(plain, EncodingContent::math_op).empty());
  CHECK(token_stream(plain, EncodingContent::math_surroundings).empty());
}

TEST_CASE("encoding names and labels") {
  CHECK(parse_encoding_spec("text_tfidf").label(Granularity::document) == "docText_tfidf");
  CHECK(parse_encoding_spec("math_opid_embedding").label(Granularity::document) == "doc2vecMath_opid");
  const EncodingSpec concat = parse_encoding_spec("textmath_opid_embedding+concat");
  CHECK(concat.concatenate_vectors);
  CHECK(parse_encoding_spec(concat.name()).concatenate_vectors);
  for (std::string name : {"text_tfidf", "math_op_tfidf", "math_id_embedding", "math_surroundings_tfidf",
                           "textmath_surroundings_embedding", "semantified_tfidf"})
    CHECK(parse_encoding_spec(name).name() == name);
  CHECK_THROWS_AS(parse_encoding_spec("text"), Error);
  CHECK_THROWS_AS(parse_encoding_spec("prose_tfidf"), Error);
}

TEST_CASE("held-out encoding is fitted on training rows only") {
  std::vector<Document> docs = {parse_html("<p>apple banana</p>"), parse_html("<p>banana cherry</p>"),
                                parse_html("<p>durian elderberry</p>")};
  for (std::size_t i = 0; i < docs.size(); ++i) docs[i].id = "d" + std::to_string(i);
  const EncodingSpec spec = parse_encoding_spec("text_tfidf");
  const EncodingInput input = prepare_encoding_input(spec, docs, {});
  const std::vector<std::size_t> train = {0, 1}, test = {2};
  const SplitEncoding split = encode_split(spec, input, train, test);
  CHECK(split.train.cols() == 3);
  CHECK(split.test.sample_ids == std::vector<std::string>{"d2"});
  CHECK(split.test.features.isZero(0));
}

TEST_CASE("encoded matrix csv round trip") {
  EncodedMatrix m;
  m.spec = parse_encoding_spec("math_id_tfidf");
  m.sample_ids = {"a", "b"};
  m.features = Matrix::Random(2, 3);
  m.features(0, 0) = 1.0 / 3.0;
  m.feature_names = std::vector<std::string>{"id:x", "id:y", "id:z,w"};
  const auto path = std::filesystem::temp_directory_path() / "mathenc_matrix_roundtrip.csv";
  write_encoded_matrix(m, path);
  CHECK(std::filesystem::exists(sidecar_path(path)));
  const EncodedMatrix back = read_encoded_matrix(path);
  CHECK(back.sample_ids == m.sample_ids);
  CHECK(back.features == m.features);
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.spec.name() == m.spec.name());
  std::filesystem::remove(path);
  std::filesystem::remove(sidecar_path(path));
}

TEST_CASE("encoded matrix validation") {
  EncodedMatrix m;
  m.sample_ids = {"a"};
  m.features = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(m.validate(), Error);
  m.sample_ids = {"a", "b"};
  m.features(1, 1) = std::nan("");
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("pca on collinear points") {
  Matrix x(5, 2);
  for (int i = 0; i < 5; ++i) x.row(i) << i - 2.0, i - 2.0;
  const PcaModel m = fit_pca(x, 1);
  CHECK(m.explained_variance_ratio(0) == doctest::Approx(1.0).epsilon(1e-12));
  const Matrix p = pca_transform(m, x);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(std::abs(p(i, 0)) - std::sqrt(2.0) * std::abs(i - 2.0)) < 1e-12);
  // Largest-magnitude loading positive.
  const Eigen::Index arg = [&] {
    Eigen::Index a;
    m.components.col(0).cwiseAbs().maxCoeff(&a);
    return a;
  }();
  CHECK(m.components(arg, 0) > 0);
}

TEST_CASE("pca with all dimensions reconstructs exactly") {
  Rng rng(8);
  Matrix x(12, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  const PcaModel m = fit_pca(x, 4);
  const Matrix p = pca_transform(m, x);
  const Matrix back = (p * m.components.transpose()).rowwise() + m.mean.transpose();
  CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pca matches an independent eigendecomposition") {
  Rng rng(21);
  Matrix x(50, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal() * (1 + i % 7);
  const PcaModel m = fit_pca(x, 10);
  const Matrix centred = x.rowwise() - x.colwise().mean();
  const Matrix cov = centred.transpose() * centred / (x.rows() - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  const Vector eig = solver.eigenvalues().reverse();
  CHECK((m.explained_variance - eig).cwiseAbs().maxCoeff() < 1e-8);
  const Matrix gram = m.components.transpose() * m.components;
  CHECK((gram - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);
  const Matrix p = pca_transform(m, x);
  const Matrix pc = p.transpose() * p;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j) CHECK(std::abs(pc(i, j)) < 1e-8 * x.rows() * 100);
}

TEST_CASE("pca errors and defaults") {
  CHECK_THROWS_AS(fit_pca(Matrix::Ones(4, 3), 1), Error);
  CHECK_THROWS_AS(fit_pca(Matrix::Random(4, 3), 4), Error);
  CHECK_THROWS_AS(fit_pca(Matrix::Random(4, 3), 0), Error);
  CHECK(default_pca_dims(1000, 300) == 50);
  CHECK(default_pca_dims(10, 300) == 9);
  CHECK(default_pca_dims(10, 3) == 3);
  EncodedMatrix em;
  em.sample_ids = {"a", "b", "c", "d"};
  em.features = Matrix::Random(4, 3);
  CHECK(pca_reduce(em, 2).features.rows() == 4);
  CHECK(pca_reduce(em, 2).features.cols() == 2);
}
