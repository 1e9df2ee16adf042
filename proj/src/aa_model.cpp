#include "lexembed/aa_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lexembed/errors.hpp"
#include "lexembed/rng.hpp"
#include "seeds.hpp"

namespace lexembed {

void AaModelConfig::validate() const {
  if (m < 1) throw ParameterError("script filter window must be at least 1");
  if (h < 1) throw ParameterError("feature map count must be at least 1");
  if (!(init_scale > 0.0)) throw ParameterError("init scale must be positive");
}

void AaTrainConfig::validate() const {
  if (epochs < 1) throw ParameterError("epochs must be at least 1");
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(l2 >= 0.0)) throw ParameterError("l2 rate must be non-negative");
  if (batch_size < 1) throw ParameterError("batch size must be at least 1");
}

AaModel AaModel::init(const AaModelConfig& config, std::size_t dim) {
  config.validate();
  AaModel model;
  model.m = config.m;
  model.frozen_embeddings = config.frozen_embeddings;
  model.filter = uniform_init(config.h, config.m * dim, config.init_scale, derive_seed(config.seed, SeedStream::kFilter));
  const auto biases = uniform_init(1, config.h + 1, config.init_scale, derive_seed(config.seed, SeedStream::kBias));
  model.filter_bias.assign(biases.values().begin(), biases.values().end() - 1);
  model.head_bias = biases.values().back();
  const auto head = uniform_init(1, config.h, config.init_scale, derive_seed(config.seed, SeedStream::kHead));
  model.head.assign(head.values().begin(), head.values().end());
  return model;
}

ParamBundle AaModel::parameters() const {
  const std::size_t h = feature_maps();
  return {{"aa.filter", filter},
          {"aa.filter_bias", DenseMatrix(1, h, filter_bias)},
          {"aa.head", DenseMatrix(1, h, head)},
          {"aa.head_bias", DenseMatrix(1, 1, head_bias)}};
}

AaModel AaModel::from_parameters(const ParamBundle& params, std::size_t m, bool frozen_embeddings) {
  AaModel model;
  model.m = m;
  model.frozen_embeddings = frozen_embeddings;
  model.filter = params.at("aa.filter");
  const std::size_t h = model.filter.rows();
  const auto& fb = params.at("aa.filter_bias");
  const auto& hd = params.at("aa.head");
  if (fb.size() != h || hd.size() != h) throw DimensionError("AA bias/head size does not match the filter");
  if (m == 0 || model.filter.cols() % m != 0) throw DimensionError("AA filter width does not fit window size");
  model.filter_bias.assign(fb.values().begin(), fb.values().end());
  model.head.assign(hd.values().begin(), hd.values().end());
  model.head_bias = params.at("aa.head_bias").values()[0];
  return model;
}

IndexedScript index_script(const Script& script, const Vocabulary& vocab) {
  return {script.id, vocab.indices(script.tokens), script.score_range.normalize(script.gold_score)};
}

namespace {

// Forward state kept for the backward pass.
struct Activations {
  DenseVector x;    // l*dim gathered script embedding
  DenseVector pre;  // positions x h pre-activations
  std::size_t positions = 0;
  DenseVector pooled;
  double pred = 0.0;
};

void forward(const AaModel& model, const EmbeddingMatrix& emb, const IndexedScript& script, Activations& act) {
  const std::size_t d = emb.dim();
  const std::size_t h = model.feature_maps();
  const std::size_t width = model.m * d;
  if (model.filter.cols() != width) throw DimensionError("AA filter width does not match embedding dimension");
  if (script.ids.size() < model.m) {
    throw InputError("script '" + script.id + "' has " + std::to_string(script.ids.size()) +
                     " tokens, fewer than the window of " + std::to_string(model.m));
  }
  act.x.resize(script.ids.size() * d);
  for (std::size_t p = 0; p < script.ids.size(); ++p) {
    if (script.ids[p] >= emb.matrix.rows()) throw IndexError("embedding index out of range");
    const auto row = emb.matrix.row(script.ids[p]);
    std::copy(row.begin(), row.end(), act.x.begin() + static_cast<std::ptrdiff_t>(p * d));
  }
  act.positions = script.ids.size() - model.m + 1;
  act.pre.resize(act.positions * h);
  act.pooled.assign(h, 0.0);
  const std::span<const double> x(act.x);
  for (std::size_t p = 0; p < act.positions; ++p) {
    const auto window = x.subspan(p * d, width);
    for (std::size_t j = 0; j < h; ++j) {
      const double z = model.filter_bias[j] + dot(model.filter.row(j), window);
      act.pre[p * h + j] = z;
      if (z > 0.0) act.pooled[j] += z;
    }
  }
  const double inv = 1.0 / static_cast<double>(act.positions);
  for (double& s : act.pooled) s *= inv;
  act.pred = dot(model.head, act.pooled) + model.head_bias;
}

}  // namespace

AaOutput aa_forward(const AaModel& model, const EmbeddingMatrix& emb, const IndexedScript& script) {
  Activations act;
  forward(model, emb, script, act);
  return {act.pred, std::move(act.pooled)};
}

AaBatchResult aa_batch_loss_grads(const AaModel& model, const EmbeddingMatrix& emb,
                                  std::span<const IndexedScript> batch, double l2) {
  if (batch.empty()) throw ParameterError("empty AA batch");
  const std::size_t d = emb.dim();
  const std::size_t h = model.feature_maps();
  const std::size_t width = model.m * d;

  AaBatchResult out;
  AaGrads& g = out.grads;
  g.filter = DenseMatrix(h, width);
  g.filter_bias.assign(h, 0.0);
  g.head.assign(h, 0.0);

  Activations act;
  DenseVector dx;
  DenseVector ds(h);
  for (const auto& script : batch) {
    forward(model, emb, script, act);
    const double diff = script.gold_norm - act.pred;
    out.data_loss += diff * diff;
    const double dpred = -2.0 * diff;
    axpy(dpred, act.pooled, g.head);
    g.head_bias += dpred;

    // Average pooling hands each position 1/positions of dS.
    const double inv = 1.0 / static_cast<double>(act.positions);
    for (std::size_t j = 0; j < h; ++j) ds[j] = dpred * model.head[j] * inv;
    const bool want_dx = !model.frozen_embeddings;
    if (want_dx) dx.assign(act.x.size(), 0.0);
    const std::span<const double> x(act.x);
    for (std::size_t p = 0; p < act.positions; ++p) {
      const auto window = x.subspan(p * d, width);
      for (std::size_t j = 0; j < h; ++j) {
        if (act.pre[p * h + j] <= 0.0) continue;
        axpy(ds[j], window, g.filter.row(j));
        g.filter_bias[j] += ds[j];
        if (want_dx) axpy(ds[j], model.filter.row(j), std::span<double>(dx).subspan(p * d, width));
      }
    }
    if (want_dx) {
      for (std::size_t p = 0; p < script.ids.size(); ++p) {
        accumulate_row(g.embeddings, script.ids[p], std::span<const double>(dx).subspan(p * d, d));
      }
    }
  }

  const double penalty = squared_norm(model.filter.values()) + squared_norm(model.head);
  out.loss = out.data_loss + l2 * penalty;
  if (l2 > 0.0) {
    axpy(2.0 * l2, model.filter.values(), g.filter.values());
    axpy(2.0 * l2, model.head, g.head);
  }
  return out;
}

double mse(const AaModel& model, const EmbeddingMatrix& emb, std::span<const IndexedScript> scripts) {
  if (scripts.empty()) throw ParameterError("mse over an empty set");
  double total = 0.0;
  for (const auto& s : scripts) {
    const double diff = s.gold_norm - aa_forward(model, emb, s).pred_norm;
    total += diff * diff;
  }
  return total / static_cast<double>(scripts.size());
}

AaTrainResult train_aa(std::span<const Script> train, std::span<const Script> dev, EmbeddingMatrix emb,
                       const AaModelConfig& model_config, const AaTrainConfig& train_config,
                       const AaEpochCallback& on_epoch) {
  model_config.validate();
  train_config.validate();
  if (train.empty()) throw ParameterError("training set is empty");
  if (dev.empty()) throw ParameterError("dev set is empty");
  std::set<std::string> train_ids;
  for (const auto& s : train) train_ids.insert(s.id);
  for (const auto& s : dev) {
    if (train_ids.contains(s.id)) throw ParameterError("script '" + s.id + "' is in both train and dev");
  }

  std::vector<IndexedScript> train_set;
  std::vector<IndexedScript> dev_set;
  for (const auto& s : train) train_set.push_back(index_script(s, emb.vocab));
  for (const auto& s : dev) dev_set.push_back(index_script(s, emb.vocab));
  for (const auto* set : {&train_set, &dev_set}) {
    for (const auto& s : *set) {
      if (s.ids.size() < model_config.m) {
        throw InputError("script '" + s.id + "' is shorter than the window of " + std::to_string(model_config.m));
      }
    }
  }

  AaTrainResult result;
  AaModel model = AaModel::init(model_config, emb.dim());
  Rng shuffler(derive_seed(train_config.seed, SeedStream::kShuffle));
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    shuffler.shuffle(std::span<IndexedScript>(train_set));
    double data_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t lo = 0; lo < train_set.size(); lo += train_config.batch_size, ++batch_no) {
      const std::size_t hi = std::min(train_set.size(), lo + train_config.batch_size);
      const auto res = aa_batch_loss_grads(model, emb, std::span<const IndexedScript>(train_set).subspan(lo, hi - lo),
                                           train_config.l2);
      if (!std::isfinite(res.loss)) throw TrainingError("non-finite AA loss", epoch, batch_no);
      data_loss += res.data_loss;
      const auto& g = res.grads;
      try {
        sgd_step(model.filter.values(), g.filter.values(), train_config.lr);
        sgd_step(model.filter_bias, g.filter_bias, train_config.lr);
        sgd_step(model.head, g.head, train_config.lr);
        model.head_bias -= train_config.lr * g.head_bias;
        if (!model.frozen_embeddings) apply_row_grads(emb.matrix, g.embeddings, train_config.lr);
      } catch (const NumericError& e) {
        throw TrainingError(e.what(), epoch, batch_no);
      }
      if (!std::isfinite(model.head_bias)) throw TrainingError("non-finite AA bias", epoch, batch_no);
    }
    AaEpochRecord record{epoch, data_loss / static_cast<double>(train_set.size()), mse(model, emb, dev_set)};
    if (!std::isfinite(record.dev_mse)) throw TrainingError("non-finite dev MSE", epoch, batch_no);
    result.history.push_back(record);
    if (record.dev_mse < best) {
      best = record.dev_mse;
      result.best_epoch = epoch;
      result.best_dev_mse = record.dev_mse;
      result.model = model;
      result.embeddings = emb;
    }
    if (on_epoch) on_epoch(record);
  }
  return result;
}

double predict(const AaModel& model, const EmbeddingMatrix& emb, const Script& script) {
  const auto out = aa_forward(model, emb, index_script(script, emb.vocab));
  return script.score_range.denormalize(std::clamp(out.pred_norm, 0.0, 1.0));
}

}  // namespace lexembed
