#include <algorithm>
#include <cmath>

#include "lexembed/errors.hpp"
#include "lexembed/pretrain.hpp"
#include "seeds.hpp"

namespace lexembed {

void accumulate_row(RowGrads& out, std::size_t row, std::span<const double> grad) {
  auto [it, fresh] = out.try_emplace(row);
  if (fresh) it->second.assign(grad.size(), 0.0);
  axpy(1.0, grad, it->second);
}

void apply_row_grads(DenseMatrix& embeddings, const RowGrads& grads, double lr) {
  for (const auto& [row, g] : grads) sgd_step(embeddings.row(row), g, lr);
}

DenseMatrix densify(const RowGrads& grads, std::size_t rows, std::size_t dim) {
  DenseMatrix out(rows, dim);
  for (const auto& [row, g] : grads) std::copy(g.begin(), g.end(), out.row(row).begin());
  return out;
}

std::string to_string(PretrainMethod method) {
  switch (method) {
    case PretrainMethod::kEswe: return "eswe";
    case PretrainMethod::kEcswe: return "ecswe";
    case PretrainMethod::kSswe: return "sswe";
  }
  return "unknown";
}

PretrainMethod parse_method(std::string_view name) {
  if (name == "eswe") return PretrainMethod::kEswe;
  if (name == "ecswe") return PretrainMethod::kEcswe;
  if (name == "sswe") return PretrainMethod::kSswe;
  throw ParameterError("unknown pre-training method '" + std::string(name) + "'");
}

void PretrainConfig::validate() const {
  if (n < 1) throw ParameterError("ngram size must be at least 1");
  if (epochs < 1) throw ParameterError("epochs must be at least 1");
  if (!(lr > 0.0)) throw ParameterError("learning rate must be positive");
  if (batch_size < 1) throw ParameterError("batch size must be at least 1");
  if (!(init_scale > 0.0)) throw ParameterError("init scale must be positive");
  if (method == PretrainMethod::kSswe) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
    if (k_noisy < 1) throw ParameterError("k_noisy must be at least 1");
    if (hidden < 1) throw ParameterError("hidden size must be at least 1");
  }
}

std::vector<IndexedNgram> index_ngrams(const Script& script, const Vocabulary& vocab, std::size_t n) {
  const auto ids = vocab.indices(script.tokens);
  std::vector<IndexedNgram> out;
  for (const auto& ng : extract_ngrams(script, n)) {
    out.push_back({{ids.begin() + static_cast<std::ptrdiff_t>(ng.start),
                    ids.begin() + static_cast<std::ptrdiff_t>(ng.start + n)},
                   ng.gold_error_score});
  }
  return out;
}

std::vector<std::size_t> ngram_ids(const Script& script, const NgramInstance& ngram, const Vocabulary& vocab) {
  if (ngram.start + ngram.n > script.tokens.size()) throw IndexError("ngram runs past the end of its script");
  return vocab.indices(std::span<const Token>(script.tokens).subspan(ngram.start, ngram.n));
}

EsweModel EsweModel::init(std::size_t n, std::size_t dim, double scale, std::uint64_t seed) {
  EsweModel m;
  m.n = n;
  m.filter = uniform_init(1, n * dim, scale, derive_seed(seed, SeedStream::kFilter));
  m.bias = uniform_init(1, 1, scale, derive_seed(seed, SeedStream::kBias)).values()[0];
  return m;
}

ParamBundle EsweModel::parameters() const {
  return {{"eswe.filter", filter}, {"eswe.bias", DenseMatrix(1, 1, bias)}};
}

EsweModel EsweModel::from_parameters(const ParamBundle& params, std::size_t n) {
  EsweModel m;
  m.n = n;
  m.filter = params.at("eswe.filter");
  m.bias = params.at("eswe.bias").values()[0];
  if (m.filter.rows() != 1 || n == 0 || m.filter.cols() % n != 0) {
    throw DimensionError("ESWE filter shape does not fit ngram size " + std::to_string(n));
  }
  return m;
}

namespace {

void check_ngram(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  if (ids.size() != model.n) {
    throw DimensionError("ngram of length " + std::to_string(ids.size()) + " for an n=" +
                         std::to_string(model.n) + " model");
  }
  if (model.filter.cols() != model.n * emb.dim()) {
    throw DimensionError("ESWE filter width does not match embedding dimension");
  }
}

double eswe_logit(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  const std::size_t d = emb.dim();
  const auto w = model.filter.values();
  double z = model.bias;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= emb.matrix.rows()) throw IndexError("embedding index out of range");
    z += dot(w.subspan(k * d, d), emb.matrix.row(ids[k]));
  }
  return z;
}

}  // namespace

double eswe_forward(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  check_ngram(model, emb, ids);
  return sigmoid(eswe_logit(model, emb, ids));
}

double eswe_forward(const EsweModel& model, const EmbeddingMatrix& emb, const Script& script,
                    const NgramInstance& ngram) {
  return eswe_forward(model, emb, ngram_ids(script, ngram, emb.vocab));
}

EsweBatchResult eswe_batch_loss_grads(const EsweModel& model, const EmbeddingMatrix& emb,
                                      std::span<const IndexedNgram> batch) {
  if (batch.empty()) throw ParameterError("empty ESWE batch");
  const std::size_t d = emb.dim();
  EsweBatchResult out;
  out.grads.filter = DenseMatrix(1, model.filter.cols());
  const auto w = model.filter.values();
  auto gw = out.grads.filter.values();
  for (const auto& ng : batch) {
    check_ngram(model, emb, ng.ids);
    const double pred = sigmoid(eswe_logit(model, emb, ng.ids));
    const double diff = ng.gold - pred;
    out.loss += diff * diff;
    // d/dz (gold - sigmoid(z))^2 = -2 (gold - pred) pred (1 - pred)
    const double dz = -2.0 * diff * pred * (1.0 - pred);
    out.grads.bias += dz;
    for (std::size_t k = 0; k < ng.ids.size(); ++k) {
      axpy(dz, emb.matrix.row(ng.ids[k]), gw.subspan(k * d, d));
      auto [it, fresh] = out.grads.embeddings.try_emplace(ng.ids[k]);
      if (fresh) it->second.assign(d, 0.0);
      axpy(dz, w.subspan(k * d, d), it->second);
    }
  }
  return out;
}

namespace {

EsweResult run_eswe(std::vector<IndexedNgram> pool, EmbeddingMatrix emb, const PretrainConfig& config,
                    const EpochCallback& on_epoch) {
  if (pool.empty()) throw ParameterError("corpus yields no ngrams of size " + std::to_string(config.n));
  EsweResult result{std::move(emb), {}, {}};
  result.model = EsweModel::init(config.n, result.embeddings.dim(), config.init_scale, config.seed);
  Rng shuffler(derive_seed(config.seed, SeedStream::kShuffle));
  EsweModel& model = result.model;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(std::span<IndexedNgram>(pool));
    double total = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t lo = 0; lo < pool.size(); lo += config.batch_size, ++batch_no) {
      const std::size_t hi = std::min(pool.size(), lo + config.batch_size);
      const auto res = eswe_batch_loss_grads(model, result.embeddings,
                                             std::span<const IndexedNgram>(pool).subspan(lo, hi - lo));
      if (!std::isfinite(res.loss)) throw TrainingError("non-finite ESWE loss", epoch, batch_no);
      total += res.loss;
      try {
        sgd_step(model.filter.values(), res.grads.filter.values(), config.lr);
        model.bias -= config.lr * res.grads.bias;
        apply_row_grads(result.embeddings.matrix, res.grads.embeddings, config.lr);
      } catch (const NumericError& e) {
        throw TrainingError(e.what(), epoch, batch_no);
      }
      if (!std::isfinite(model.bias)) throw TrainingError("non-finite ESWE bias", epoch, batch_no);
    }
    const double mean = total / static_cast<double>(pool.size());
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

void check_method(const PretrainConfig& config, PretrainMethod expected) {
  config.validate();
  if (config.method != expected) {
    throw ParameterError("config method is " + to_string(config.method) + ", expected " + to_string(expected));
  }
}

}  // namespace

EsweResult train_eswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                      const EpochCallback& on_epoch) {
  check_method(config, PretrainMethod::kEswe);
  std::vector<IndexedNgram> pool;
  for (const auto& script : corpus) {
    auto ngrams = index_ngrams(script, emb.vocab, config.n);
    std::move(ngrams.begin(), ngrams.end(), std::back_inserter(pool));
  }
  return run_eswe(std::move(pool), std::move(emb), config, on_epoch);
}

EsweResult train_ecswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                       const EpochCallback& on_epoch) {
  check_method(config, PretrainMethod::kEcswe);
  std::vector<IndexedNgram> pool;
  for (const auto& script : corpus) {
    auto ngrams = index_ngrams(script, emb.vocab, config.n);
    std::move(ngrams.begin(), ngrams.end(), std::back_inserter(pool));
  }
  for (const auto& script : corpus) {
    auto ngrams = index_ngrams(build_corrected_script(script), emb.vocab, config.n);
    std::move(ngrams.begin(), ngrams.end(), std::back_inserter(pool));
  }
  return run_eswe(std::move(pool), std::move(emb), config, on_epoch);
}

}  // namespace lexembed
