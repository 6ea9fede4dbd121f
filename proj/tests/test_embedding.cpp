#include "mathenc/embedding.hpp"
#include "mathenc/encode.hpp"
#include "mathenc/error.hpp"
#include "mathenc/linalg.hpp"
#include "mathenc/random.hpp"

#include <doctest.h>

using namespace mathenc;

namespace {

// Two classes with disjoint vocabularies of 50 words, 20 documents each.
std::vector<TokenStream> two_class_streams(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenStream> out;
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 20; ++d) {
      TokenStream s;
      for (int t = 0; t < 60; ++t) s.push_back("w" + std::to_string(c) + "_" + std::to_string(rng.index(50)));
      out.push_back(std::move(s));
    }
  return out;
}

EmbeddingParams small_params() {
  EmbeddingParams p;
  p.size = 32;
  p.window = 4;
  p.min_count = 2;
  p.seed = 17;
  return p;
}

}  // namespace

TEST_CASE("default parameters") {
  const EmbeddingParams p;
  CHECK(p.size == 300);
  CHECK(p.window == 10);
  CHECK(p.min_count == 5);
  CHECK(p.epochs == 10);
  CHECK(p.iters_per_epoch == 1);
  CHECK(p.negative == 5);
  CHECK(p.initial_alpha == 0.025);
  CHECK(p.alpha_decay_per_epoch == 0.002);
  CHECK(p.rate(0, 0.0) == doctest::Approx(0.025));
  CHECK(p.rate(3, 0.5) == doctest::Approx(0.025 - 3 * 0.002));
}

TEST_CASE("parameter validation") {
  EmbeddingParams p;
  p.size = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.min_count = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.epochs = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("vocabulary respects min_count") {
  EmbeddingParams p = small_params();
  p.min_count = 5;
  std::vector<TokenStream> streams = {{"rare", "rare", "common", "common", "common"},
                                      {"rare", "rare", "common", "common"}};
  const EmbeddingModel m = initialize_embedding(streams, p);
  CHECK(m.index.count("rare") == 0);
  CHECK(m.index.count("common") == 1);
  p.min_count = 10;
  CHECK_THROWS_AS(train_embedding(streams, p), Error);
}

TEST_CASE("training is deterministic") {
  const auto streams = two_class_streams(1);
  const EmbeddingModel a = train_embedding(streams, small_params());
  const EmbeddingModel b = train_embedding(streams, small_params());
  CHECK(a.doc_vectors == b.doc_vectors);
  CHECK(a.word_vectors == b.word_vectors);
  CHECK(a.doc_vectors.rows() == 40);
  CHECK(a.doc_vectors.allFinite());
}

TEST_CASE("training lowers the loss") {
  const auto streams = two_class_streams(2);
  const EmbeddingModel init = initialize_embedding(streams, small_params());
  const EmbeddingModel trained = train_embedding(streams, small_params());
  CHECK(embedding_loss(trained, streams, 99) < embedding_loss(init, streams, 99));
}

TEST_CASE("documents of the same class are closer") {
  const auto streams = two_class_streams(3);
  const EmbeddingModel m = train_embedding(streams, small_params());
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < 40; ++i)
    for (int j = i + 1; j < 40; ++j) {
      const double c = cosine_similarity(m.doc_vectors.row(i), m.doc_vectors.row(j));
      if ((i < 20) == (j < 20)) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("inference") {
  const auto streams = two_class_streams(4);
  const EmbeddingModel m = train_embedding(streams, small_params());
  const Vector v = infer_doc_vector(m, streams[3]);
  CHECK(v == infer_doc_vector(m, streams[3]));
  CHECK(cosine_similarity(v, m.doc_vectors.row(3).transpose()) >
        cosine_similarity(v, m.doc_vectors.row(30).transpose()));
  const Vector empty = infer_doc_vector(m, {});
  CHECK(empty.size() == 32);
  CHECK(empty.allFinite());
  CHECK(infer_doc_vector(m, {"never", "seen"}).allFinite());
}

TEST_CASE("embedding encodings through the encoder") {
  const auto streams = two_class_streams(5);
  EncodingInput input;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    input.ids.push_back("d" + std::to_string(i));
    input.primary.push_back(streams[i]);
  }
  EncodingSpec spec = parse_encoding_spec("text_embedding");
  spec.embedding = small_params();
  const EncodedMatrix all = encode_all(spec, input);
  CHECK(all.rows() == 40);
  CHECK(all.cols() == 32);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < 40; ++i) (i % 4 ? train : test).push_back(i);
  const SplitEncoding split = encode_split(spec, input, train, test);
  CHECK(split.train.rows() == 30);
  CHECK(split.test.rows() == 10);
  CHECK(split.test.features.allFinite());

  spec = parse_encoding_spec("textmath_opid_embedding+concat");
  spec.embedding = small_params();
  input.secondary = input.primary;
  CHECK(encode_all(spec, input).cols() == 64);
}
