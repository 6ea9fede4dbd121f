#pragma once

#include "mathenc/linalg.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mathenc {

using TokenStream = std::vector<std::string>;

/// Paragraph-vector hyperparameters. Defaults follow the doc2vec setup the
/// encodings were built with: 300 dimensions, window 10, min_count 5,
/// rate 0.025 lowered by 0.002 after each of 10 epochs, 5 noise words.
struct EmbeddingParams {
  int size = 300;
  int window = 10;
  int min_count = 5;
  double initial_alpha = 0.025;
  /// Rate reached at the end of an epoch; an epoch runs at a constant rate
  /// when this is not below the epoch's starting rate.
  double min_alpha = 0.025;
  int iters_per_epoch = 1;
  int epochs = 10;
  double alpha_decay_per_epoch = 0.002;
  int negative = 5;
  std::uint64_t seed = 1;
  int inference_steps = 50;
  double inference_alpha = 0.025;

  void validate() const;
  /// Learning rate at `progress` in [0, 1) through epoch `epoch`.
  double rate(int epoch, double progress) const;
};

/// Distributed-memory paragraph vectors (mean of document and context word
/// vectors predicts the centre word) trained with negative sampling.
struct EmbeddingModel {
  EmbeddingParams params;
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, int> index;
  std::vector<std::int64_t> counts;
  RowMatrix word_vectors;
  RowMatrix output_vectors;
  RowMatrix doc_vectors;
  /// Cumulative unigram^0.75 distribution for noise draws.
  std::vector<double> noise_cdf;

  int size() const { return params.size; }
  int draw_noise(double u) const;
};

/// Builds the vocabulary and random initial vectors without training.
EmbeddingModel initialize_embedding(const std::vector<TokenStream>& streams,
                                    const EmbeddingParams& params);

EmbeddingModel train_embedding(const std::vector<TokenStream>& streams,
                               const EmbeddingParams& params);

/// Fits a fresh document vector against frozen word/output vectors.
Vector infer_doc_vector(const EmbeddingModel& model, const TokenStream& stream);

/// Mean negative-sampling loss over every in-vocabulary position of the
/// training streams, using the model's document vectors and a full window.
/// Noise words come from `seed`, so two models can be compared on equal terms.
double embedding_loss(const EmbeddingModel& model, const std::vector<TokenStream>& streams,
                      std::uint64_t seed);

}  // namespace mathenc
