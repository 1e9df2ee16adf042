#include <algorithm>
#include <cmath>

#include "lexembed/errors.hpp"
#include "lexembed/pretrain.hpp"
#include "seeds.hpp"

namespace lexembed {

std::vector<std::vector<std::size_t>> sample_noisy(std::span<const std::size_t> ids, const Vocabulary& vocab,
                                                   std::size_t k, Rng& rng) {
  if (ids.empty()) throw DimensionError("cannot corrupt an empty ngram");
  if (vocab.non_reserved_size() < 3) {
    throw ParameterError("noisy sampling needs at least 3 non-reserved vocabulary words");
  }
  const std::size_t target = noisy_target_position(ids.size());
  const std::size_t original = ids[target];
  std::vector<std::vector<std::size_t>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t replacement = original;
    while (replacement == original) replacement = 2 + rng.below(vocab.non_reserved_size());
    auto& copy = out.emplace_back(ids.begin(), ids.end());
    copy[target] = replacement;
  }
  return out;
}

SsweModel SsweModel::init(std::size_t n, std::size_t dim, std::size_t hidden, double alpha, std::size_t k_noisy,
                          double scale, std::uint64_t seed) {
  SsweModel m;
  m.n = n;
  m.alpha = alpha;
  m.k_noisy = k_noisy;
  m.hidden = uniform_init(hidden, n * dim, scale, derive_seed(seed, SeedStream::kFilter));
  const auto biases = uniform_init(1, hidden + 2, scale, derive_seed(seed, SeedStream::kBias));
  m.hidden_bias.assign(biases.values().begin(), biases.values().begin() + static_cast<std::ptrdiff_t>(hidden));
  m.rank_bias = biases.values()[hidden];
  m.score_bias = biases.values()[hidden + 1];
  const auto heads = uniform_init(2, hidden, scale, derive_seed(seed, SeedStream::kHead));
  m.rank_head.assign(heads.row(0).begin(), heads.row(0).end());
  m.score_head.assign(heads.row(1).begin(), heads.row(1).end());
  return m;
}

ParamBundle SsweModel::parameters() const {
  const std::size_t h = hidden_size();
  return {{"sswe.hidden", hidden},
          {"sswe.hidden_bias", DenseMatrix(1, h, hidden_bias)},
          {"sswe.rank_head", DenseMatrix(1, h, rank_head)},
          {"sswe.rank_bias", DenseMatrix(1, 1, rank_bias)},
          {"sswe.score_head", DenseMatrix(1, h, score_head)},
          {"sswe.score_bias", DenseMatrix(1, 1, score_bias)}};
}

SsweModel SsweModel::from_parameters(const ParamBundle& params, std::size_t n, double alpha, std::size_t k_noisy) {
  SsweModel m;
  m.n = n;
  m.alpha = alpha;
  m.k_noisy = k_noisy;
  m.hidden = params.at("sswe.hidden");
  const std::size_t h = m.hidden.rows();
  auto vec = [&](const char* name) {
    const auto& p = params.at(name);
    if (p.size() != h) throw DimensionError(std::string(name) + " does not match the hidden size");
    return DenseVector(p.values().begin(), p.values().end());
  };
  m.hidden_bias = vec("sswe.hidden_bias");
  m.rank_head = vec("sswe.rank_head");
  m.score_head = vec("sswe.score_head");
  m.rank_bias = params.at("sswe.rank_bias").values()[0];
  m.score_bias = params.at("sswe.score_bias").values()[0];
  if (n == 0 || m.hidden.cols() % n != 0) throw DimensionError("SSWE hidden layer does not fit ngram size");
  return m;
}

namespace {

void check_shapes(const SsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  if (ids.size() != model.n) throw DimensionError("ngram length does not match the SSWE model");
  if (model.hidden.cols() != model.n * emb.dim()) {
    throw DimensionError("SSWE hidden layer width does not match embedding dimension");
  }
  for (auto id : ids) {
    if (id >= emb.matrix.rows()) throw IndexError("embedding index out of range");
  }
}

// z = W x + b for the ngram, and the contribution of the target slice alone.
void hidden_preactivation(const SsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids,
                          std::size_t target, DenseVector& z, DenseVector& target_part) {
  const std::size_t d = emb.dim();
  const std::size_t h = model.hidden_size();
  z.assign(h, 0.0);
  target_part.assign(h, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    const auto w = model.hidden.row(i);
    double acc = model.hidden_bias[i];
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double part = dot(w.subspan(k * d, d), emb.matrix.row(ids[k]));
      acc += part;
      if (k == target) target_part[i] = part;
    }
    z[i] = acc;
  }
}

void tanh_inplace(DenseVector& v) {
  for (double& x : v) x = std::tanh(x);
}

}  // namespace

SsweScores sswe_forward(const SsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  check_shapes(model, emb, ids);
  DenseVector z;
  DenseVector unused;
  hidden_preactivation(model, emb, ids, ids.size(), z, unused);
  tanh_inplace(z);
  return {dot(model.rank_head, z) + model.rank_bias, dot(model.score_head, z) + model.score_bias};
}

SsweBatchResult sswe_batch_loss_grads(const SsweModel& model, const EmbeddingMatrix& emb,
                                      std::span<const SsweExample> batch) {
  if (batch.empty()) throw ParameterError("empty SSWE batch");
  const std::size_t d = emb.dim();
  const std::size_t H = model.hidden_size();
  const double alpha = model.alpha;

  SsweBatchResult out;
  SsweGrads& g = out.grads;
  g.hidden = DenseMatrix(H, model.hidden.cols());
  g.hidden_bias.assign(H, 0.0);
  g.rank_head.assign(H, 0.0);
  g.score_head.assign(H, 0.0);

  DenseVector z, target_part, h, base, hk, dz, dz_all, dzk, row_grad(d);
  std::vector<DenseVector> noisy_h;
  std::vector<double> noisy_rank;

  for (const auto& ex : batch) {
    check_shapes(model, emb, ex.ids);
    const std::size_t n = ex.ids.size();
    const std::size_t t = noisy_target_position(n);
    hidden_preactivation(model, emb, ex.ids, t, z, target_part);
    base.resize(H);
    for (std::size_t i = 0; i < H; ++i) base[i] = z[i] - target_part[i];
    h = z;
    tanh_inplace(h);
    // The rank bias cancels inside every hinge, so margins are computed from
    // the head products alone and its gradient is exactly zero.
    const double rank = dot(model.rank_head, h);
    const double score = dot(model.score_head, h) + model.score_bias;

    const double score_diff = ex.gold_norm - score;
    out.score_loss += score_diff * score_diff;
    const double g_score = -2.0 * (1.0 - alpha) * score_diff;
    double g_rank = 0.0;

    dz_all.assign(H, 0.0);
    for (const auto& noisy : ex.noisy) {
      if (noisy.size() != n) throw DimensionError("noisy ngram length differs from its source");
      for (std::size_t k = 0; k < n; ++k) {
        if (k != t && noisy[k] != ex.ids[k]) {
          throw ParameterError("noisy ngram differs from its source outside the target position");
        }
      }
      const std::size_t nid = noisy[t];
      if (nid >= emb.matrix.rows()) throw IndexError("embedding index out of range");
      const auto v = emb.matrix.row(nid);
      hk.resize(H);
      for (std::size_t i = 0; i < H; ++i) {
        hk[i] = std::tanh(base[i] + dot(model.hidden.row(i).subspan(t * d, d), v));
      }
      const double rank_k = dot(model.rank_head, hk);
      const double margin = 1.0 - rank + rank_k;
      if (margin <= 0.0) continue;
      out.ranking_loss += margin;
      g_rank -= alpha;
      // Gradient through the noisy copy: dL/drank_k = alpha.
      axpy(alpha, hk, g.rank_head);
      dzk.resize(H);
      for (std::size_t i = 0; i < H; ++i) dzk[i] = alpha * model.rank_head[i] * (1.0 - hk[i] * hk[i]);
      std::fill(row_grad.begin(), row_grad.end(), 0.0);
      for (std::size_t i = 0; i < H; ++i) {
        if (dzk[i] == 0.0) continue;
        axpy(dzk[i], v, g.hidden.row(i).subspan(t * d, d));
        axpy(dzk[i], model.hidden.row(i).subspan(t * d, d), row_grad);
      }
      accumulate_row(g.embeddings, nid, row_grad);
      axpy(1.0, dzk, dz_all);
    }

    axpy(g_rank, h, g.rank_head);
    axpy(g_score, h, g.score_head);
    g.score_bias += g_score;
    dz.resize(H);
    for (std::size_t i = 0; i < H; ++i) {
      dz[i] = (g_rank * model.rank_head[i] + g_score * model.score_head[i]) * (1.0 - h[i] * h[i]);
    }
    axpy(1.0, dz, g.hidden_bias);
    axpy(1.0, dz_all, g.hidden_bias);

    // Non-target slices are shared by the correct ngram and every noisy copy.
    axpy(1.0, dz, dz_all);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& dz_slice = k == t ? dz : dz_all;
      const auto v = emb.matrix.row(ex.ids[k]);
      std::fill(row_grad.begin(), row_grad.end(), 0.0);
      for (std::size_t i = 0; i < H; ++i) {
        if (dz_slice[i] == 0.0) continue;
        axpy(dz_slice[i], v, g.hidden.row(i).subspan(k * d, d));
        axpy(dz_slice[i], model.hidden.row(i).subspan(k * d, d), row_grad);
      }
      accumulate_row(g.embeddings, ex.ids[k], row_grad);
    }
  }
  out.loss = alpha * out.ranking_loss + (1.0 - alpha) * out.score_loss;
  return out;
}

SsweResult train_sswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                      const EpochCallback& on_epoch) {
  config.validate();
  if (config.method != PretrainMethod::kSswe) throw ParameterError("config method is not sswe");
  if (emb.vocab.non_reserved_size() < 3) {
    throw ParameterError("noisy sampling needs at least 3 non-reserved vocabulary words");
  }

  std::vector<SsweExample> pool;
  for (const auto& script : corpus) {
    const double gold = script.score_range.normalize(script.gold_score);
    for (auto& ng : index_ngrams(script, emb.vocab, config.n)) pool.push_back({std::move(ng.ids), gold, {}});
  }
  if (pool.empty()) throw ParameterError("corpus yields no ngrams of size " + std::to_string(config.n));

  SsweResult result{std::move(emb), {}, {}};
  result.model = SsweModel::init(config.n, result.embeddings.dim(), config.hidden, config.alpha, config.k_noisy,
                                 config.init_scale, config.seed);
  SsweModel& model = result.model;
  Rng shuffler(derive_seed(config.seed, SeedStream::kShuffle));
  Rng noise(derive_seed(config.seed, SeedStream::kNoisy));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffler.shuffle(std::span<SsweExample>(pool));
    for (auto& ex : pool) ex.noisy = sample_noisy(ex.ids, result.embeddings.vocab, config.k_noisy, noise);
    double total = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t lo = 0; lo < pool.size(); lo += config.batch_size, ++batch_no) {
      const std::size_t hi = std::min(pool.size(), lo + config.batch_size);
      const auto res = sswe_batch_loss_grads(model, result.embeddings,
                                             std::span<const SsweExample>(pool).subspan(lo, hi - lo));
      if (!std::isfinite(res.loss)) throw TrainingError("non-finite SSWE loss", epoch, batch_no);
      total += res.loss;
      const auto& g = res.grads;
      // The unbounded linear heads diverge under the summed batch gradient,
      // so SSWE steps along the batch mean.
      const double lr = config.lr / static_cast<double>(hi - lo);
      try {
        sgd_step(model.hidden.values(), g.hidden.values(), lr);
        sgd_step(model.hidden_bias, g.hidden_bias, lr);
        sgd_step(model.rank_head, g.rank_head, lr);
        sgd_step(model.score_head, g.score_head, lr);
        model.rank_bias -= lr * g.rank_bias;
        model.score_bias -= lr * g.score_bias;
        apply_row_grads(result.embeddings.matrix, g.embeddings, lr);
      } catch (const NumericError& e) {
        throw TrainingError(e.what(), epoch, batch_no);
      }
      if (!std::isfinite(model.rank_bias) || !std::isfinite(model.score_bias)) {
        throw TrainingError("non-finite SSWE bias", epoch, batch_no);
      }
    }
    for (auto& ex : pool) ex.noisy.clear();
    const double mean = total / static_cast<double>(pool.size());
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace lexembed
