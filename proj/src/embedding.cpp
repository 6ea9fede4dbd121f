#include "mathenc/embedding.hpp"

#include "mathenc/error.hpp"
#include "mathenc/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mathenc {
namespace {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), stable for large |x|.
inline double neg_log_sigmoid(double x) {
  return x >= 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

std::vector<int> to_indices(const EmbeddingModel& model, const TokenStream& stream) {
  std::vector<int> out;
  out.reserve(stream.size());
  for (const auto& t : stream)
    if (auto it = model.index.find(t); it != model.index.end()) out.push_back(it->second);
  return out;
}

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Mean of the document vector and the context word vectors around `pos`.
void context_mean(const EmbeddingModel& model, const RowVector& doc_vec, const std::vector<int>& words,
                  std::size_t pos, int half_window, RowVector& l1, std::vector<int>& context) {
  context.clear();
  const std::size_t begin = pos > static_cast<std::size_t>(half_window) ? pos - half_window : 0;
  const std::size_t end = std::min(words.size(), pos + static_cast<std::size_t>(half_window) + 1);
  l1 = doc_vec;
  for (std::size_t j = begin; j < end; ++j) {
    if (j == pos) continue;
    context.push_back(words[j]);
    l1 += model.word_vectors.row(words[j]);
  }
  l1 /= static_cast<double>(context.size() + 1);
}

// One negative-sampling update for target `word`; accumulates the input-side
// error into `err`. Output vectors are updated only when `output` is given
// (it must alias model.output_vectors).
void negative_sampling_step(const EmbeddingModel& model, RowMatrix* output, const RowVector& l1,
                            int word, double alpha, Rng& rng, RowVector& err) {
  for (int d = 0; d <= model.params.negative; ++d) {
    int target = word;
    double label = 1.0;
    if (d > 0) {
      target = model.draw_noise(rng.uniform());
      if (target == word) continue;
      label = 0.0;
    }
    const double f = sigmoid(l1.dot(model.output_vectors.row(target)));
    const double g = (label - f) * alpha;
    err.noalias() += g * model.output_vectors.row(target);
    if (output) output->row(target).noalias() += g * l1;
  }
}

}  // namespace

void EmbeddingParams::validate() const {
  if (size <= 0) throw Error(ErrorCode::invalid_argument, "embedding size must be positive");
  if (window <= 0) throw Error(ErrorCode::invalid_argument, "embedding window must be positive");
  if (min_count < 1) throw Error(ErrorCode::invalid_argument, "min_count must be at least 1");
  if (!(initial_alpha > 0)) throw Error(ErrorCode::invalid_argument, "initial_alpha must be positive");
  if (epochs < 1) throw Error(ErrorCode::invalid_argument, "epochs must be at least 1");
  if (iters_per_epoch < 1) throw Error(ErrorCode::invalid_argument, "iters_per_epoch must be at least 1");
  if (negative < 1) throw Error(ErrorCode::invalid_argument, "negative must be at least 1");
  if (min_alpha < 0) throw Error(ErrorCode::invalid_argument, "min_alpha must be non-negative");
  if (!(initial_alpha - (epochs - 1) * alpha_decay_per_epoch > 0))
    throw Error(ErrorCode::invalid_argument, "learning rate decays to zero before the last epoch");
  if (inference_steps < 0) throw Error(ErrorCode::invalid_argument, "inference_steps must be >= 0");
}

double EmbeddingParams::rate(int epoch, double progress) const {
  const double start = initial_alpha - epoch * alpha_decay_per_epoch;
  const double end = std::min(min_alpha, start);
  return start + (end - start) * progress;
}

int EmbeddingModel::draw_noise(double u) const {
  const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u * noise_cdf.back());
  return static_cast<int>(std::min<std::ptrdiff_t>(it - noise_cdf.begin(),
                                                   static_cast<std::ptrdiff_t>(noise_cdf.size()) - 1));
}

EmbeddingModel initialize_embedding(const std::vector<TokenStream>& streams,
                                    const EmbeddingParams& params) {
  params.validate();
  if (streams.empty()) throw Error(ErrorCode::invalid_argument, "no streams to train on");

  std::map<std::string, std::int64_t> counts;
  for (const auto& s : streams)
    for (const auto& t : s) ++counts[t];

  EmbeddingModel model;
  model.params = params;
  for (const auto& [token, count] : counts) {
    if (count < params.min_count) continue;
    model.index.emplace(token, static_cast<int>(model.vocabulary.size()));
    model.vocabulary.push_back(token);
    model.counts.push_back(count);
  }
  if (model.vocabulary.empty())
    throw Error(ErrorCode::empty_vocabulary,
                "no token occurs at least " + std::to_string(params.min_count) + " times");

  double total = 0.0;
  model.noise_cdf.reserve(model.counts.size());
  for (auto c : model.counts) {
    total += std::pow(static_cast<double>(c), 0.75);
    model.noise_cdf.push_back(total);
  }

  const auto vocab = static_cast<Eigen::Index>(model.vocabulary.size());
  const auto n_docs = static_cast<Eigen::Index>(streams.size());
  Rng rng(derive_seed(params.seed, 0));
  model.word_vectors.resize(vocab, params.size);
  for (Eigen::Index i = 0; i < model.word_vectors.size(); ++i)
    model.word_vectors.data()[i] = (rng.uniform() - 0.5) / params.size;
  model.doc_vectors.resize(n_docs, params.size);
  for (Eigen::Index i = 0; i < model.doc_vectors.size(); ++i)
    model.doc_vectors.data()[i] = (rng.uniform() - 0.5) / params.size;
  model.output_vectors = RowMatrix::Zero(vocab, params.size);
  return model;
}

EmbeddingModel train_embedding(const std::vector<TokenStream>& streams,
                               const EmbeddingParams& params) {
  EmbeddingModel model = initialize_embedding(streams, params);
  Rng rng(derive_seed(params.seed, 1));

  std::vector<std::vector<int>> docs;
  docs.reserve(streams.size());
  std::size_t total_words = 0;
  for (const auto& s : streams) {
    docs.push_back(to_indices(model, s));
    total_words += docs.back().size();
  }
  const double words_per_pass = std::max<std::size_t>(total_words, 1);

  RowVector l1(params.size), err(params.size), doc_vec(params.size);
  std::vector<int> context;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (int pass = 0; pass < params.iters_per_epoch; ++pass) {
      std::size_t done = 0;
      for (std::size_t d = 0; d < docs.size(); ++d) {
        const auto& words = docs[d];
        for (std::size_t pos = 0; pos < words.size(); ++pos, ++done) {
          const double progress = (pass + done / words_per_pass) / params.iters_per_epoch;
          const double alpha = params.rate(epoch, progress);
          const int half = params.window - static_cast<int>(rng.index(params.window));
          doc_vec = model.doc_vectors.row(static_cast<Eigen::Index>(d));
          context_mean(model, doc_vec, words, pos, half, l1, context);
          err.setZero();
          negative_sampling_step(model, &model.output_vectors, l1, words[pos], alpha, rng, err);
          model.doc_vectors.row(static_cast<Eigen::Index>(d)) += err;
          for (int w : context) model.word_vectors.row(w) += err;
        }
      }
    }
  }
  return model;
}

Vector infer_doc_vector(const EmbeddingModel& model, const TokenStream& stream) {
  const auto& params = model.params;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : stream) h = hash_string(t, hash_string(" ", h));
  Rng rng(derive_seed(params.seed, h));

  RowVector doc_vec(params.size);
  for (int i = 0; i < params.size; ++i) doc_vec(i) = (rng.uniform() - 0.5) / params.size;

  const auto words = to_indices(model, stream);
  if (words.empty()) return doc_vec.transpose();

  RowVector l1(params.size), err(params.size);
  std::vector<int> context;
  for (int step = 0; step < params.inference_steps; ++step) {
    for (std::size_t pos = 0; pos < words.size(); ++pos) {
      const int half = params.window - static_cast<int>(rng.index(params.window));
      context_mean(model, doc_vec, words, pos, half, l1, context);
      err.setZero();
      negative_sampling_step(model, nullptr, l1, words[pos], params.inference_alpha, rng, err);
      doc_vec += err;
    }
  }
  return doc_vec.transpose();
}

double embedding_loss(const EmbeddingModel& model, const std::vector<TokenStream>& streams,
                      std::uint64_t seed) {
  if (static_cast<Eigen::Index>(streams.size()) != model.doc_vectors.rows())
    throw Error(ErrorCode::dimension_mismatch, "loss streams must be the training streams");
  Rng rng(seed);
  RowVector l1(model.size()), doc_vec(model.size());
  std::vector<int> context;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t d = 0; d < streams.size(); ++d) {
    const auto words = to_indices(model, streams[d]);
    doc_vec = model.doc_vectors.row(static_cast<Eigen::Index>(d));
    for (std::size_t pos = 0; pos < words.size(); ++pos) {
      context_mean(model, doc_vec, words, pos, model.params.window, l1, context);
      total += neg_log_sigmoid(l1.dot(model.output_vectors.row(words[pos])));
      for (int k = 0; k < model.params.negative; ++k) {
        const int noise = model.draw_noise(rng.uniform());
        if (noise == words[pos]) continue;
        total += neg_log_sigmoid(-l1.dot(model.output_vectors.row(noise)));
      }
      ++n;
    }
  }
  return n ? total / static_cast<double>(n) : 0.0;
}

}  // namespace mathenc
