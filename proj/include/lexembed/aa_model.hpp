#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lexembed/corpus.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/numeric.hpp"
#include "lexembed/pretrain.hpp"

namespace lexembed {

struct AaModelConfig {
  std::size_t m = 3;    // script filter window
  std::size_t h = 100;  // feature maps
  bool frozen_embeddings = false;
  double init_scale = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AaTrainConfig {
  int epochs = 50;
  double lr = 0.001;
  double l2 = 0.0001;
  std::uint64_t seed = 1;
  std::size_t batch_size = 32;

  void validate() const;
};

// ReLU convolution over word windows, average pooling over positions and a
// linear regression head producing a score on the [0, 1] scale.
struct AaModel {
  DenseMatrix filter;  // h x m*dim
  DenseVector filter_bias;
  DenseVector head;
  double head_bias = 0.0;
  std::size_t m = 3;
  bool frozen_embeddings = false;

  std::size_t feature_maps() const { return filter.rows(); }

  static AaModel init(const AaModelConfig& config, std::size_t dim);

  ParamBundle parameters() const;
  static AaModel from_parameters(const ParamBundle& params, std::size_t m, bool frozen_embeddings);
};

struct IndexedScript {
  std::string id;
  std::vector<std::size_t> ids;
  double gold_norm = 0.0;
};

IndexedScript index_script(const Script& script, const Vocabulary& vocab);

struct AaOutput {
  double pred_norm = 0.0;
  DenseVector pooled;  // S, length h
};

// Throws InputError naming the script when it is shorter than the window.
AaOutput aa_forward(const AaModel& model, const EmbeddingMatrix& emb, const IndexedScript& script);

struct AaGrads {
  DenseMatrix filter;
  DenseVector filter_bias;
  DenseVector head;
  double head_bias = 0.0;
  RowGrads embeddings;  // empty when embeddings are frozen
};

struct AaBatchResult {
  double loss = 0.0;
  double data_loss = 0.0;
  AaGrads grads;
};

// sum (gold - pred)^2 + l2 * (|filter|^2 + |head|^2); biases are not penalised.
AaBatchResult aa_batch_loss_grads(const AaModel& model, const EmbeddingMatrix& emb,
                                  std::span<const IndexedScript> batch, double l2);

struct AaEpochRecord {
  int epoch = 0;
  double train_mse = 0.0;  // mean over the epoch's batches, before each update
  double dev_mse = 0.0;    // after the epoch
};

struct AaTrainResult {
  AaModel model;
  EmbeddingMatrix embeddings;
  std::vector<AaEpochRecord> history;
  int best_epoch = 0;
  double best_dev_mse = 0.0;
};

using AaEpochCallback = std::function<void(const AaEpochRecord&)>;

// Keeps the snapshot with the lowest dev MSE; ties go to the earlier epoch.
AaTrainResult train_aa(std::span<const Script> train, std::span<const Script> dev, EmbeddingMatrix emb,
                       const AaModelConfig& model_config, const AaTrainConfig& train_config,
                       const AaEpochCallback& on_epoch = {});

double mse(const AaModel& model, const EmbeddingMatrix& emb, std::span<const IndexedScript> scripts);

// pred_norm clamped to [0, 1] and mapped onto the script's score range.
double predict(const AaModel& model, const EmbeddingMatrix& emb, const Script& script);

}  // namespace lexembed
