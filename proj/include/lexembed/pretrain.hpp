#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lexembed/corpus.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/numeric.hpp"
#include "lexembed/rng.hpp"

namespace lexembed {

// Gradients for embedding rows, keyed by row index. Ordered so that updates
// are applied in a fixed order.
using RowGrads = std::map<std::size_t, DenseVector>;

// Adds grad into out[row], creating a zero row of length grad.size() first.
void accumulate_row(RowGrads& out, std::size_t row, std::span<const double> grad);

// Applies row -= lr * grad for every touched row.
void apply_row_grads(DenseMatrix& embeddings, const RowGrads& grads, double lr);

// Dense |V| x dim view of sparse row gradients (for gradient checking).
DenseMatrix densify(const RowGrads& grads, std::size_t rows, std::size_t dim);

enum class PretrainMethod { kEswe, kEcswe, kSswe };

std::string to_string(PretrainMethod method);
PretrainMethod parse_method(std::string_view name);

struct PretrainConfig {
  PretrainMethod method = PretrainMethod::kEswe;
  std::size_t n = 3;
  int epochs = 20;
  double lr = 0.01;
  std::size_t batch_size = 128;
  std::uint64_t seed = 1;
  double init_scale = 0.05;
  // SSWE only.
  double alpha = 0.1;
  std::size_t k_noisy = 20;
  std::size_t hidden = 100;

  void validate() const;
};

// An ngram resolved to vocabulary rows together with its gold error score.
struct IndexedNgram {
  std::vector<std::size_t> ids;
  double gold = 1.0;
};

std::vector<IndexedNgram> index_ngrams(const Script& script, const Vocabulary& vocab, std::size_t n);

std::vector<std::size_t> ngram_ids(const Script& script, const NgramInstance& ngram, const Vocabulary& vocab);

// --- ESWE / ECSWE ----------------------------------------------------------

// Sigmoid of a linear filter over the concatenated ngram embedding.
struct EsweModel {
  DenseMatrix filter;  // 1 x n*dim
  double bias = 0.0;
  std::size_t n = 3;

  static EsweModel init(std::size_t n, std::size_t dim, double scale, std::uint64_t seed);

  ParamBundle parameters() const;
  static EsweModel from_parameters(const ParamBundle& params, std::size_t n);
};

struct EsweGrads {
  DenseMatrix filter;
  double bias = 0.0;
  RowGrads embeddings;
};

struct EsweBatchResult {
  double loss = 0.0;
  EsweGrads grads;
};

double eswe_forward(const EsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids);
double eswe_forward(const EsweModel& model, const EmbeddingMatrix& emb, const Script& script,
                    const NgramInstance& ngram);

// Sum of squared errors over the batch with analytic gradients.
EsweBatchResult eswe_batch_loss_grads(const EsweModel& model, const EmbeddingMatrix& emb,
                                      std::span<const IndexedNgram> batch);

struct EsweResult {
  EmbeddingMatrix embeddings;
  EsweModel model;
  std::vector<double> epoch_losses;  // mean loss per ngram
};

// Optional per-epoch hook (epoch is 1-based).
using EpochCallback = std::function<void(int epoch, double mean_loss)>;

EsweResult train_eswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                      const EpochCallback& on_epoch = {});

// Ngrams of the original scripts followed by those of their corrected
// versions (all gold 1), shuffled together every epoch.
EsweResult train_ecswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                       const EpochCallback& on_epoch = {});

// --- SSWE ------------------------------------------------------------------

// Zero-based position replaced in noisy copies: ceil(n/2) - 1.
constexpr std::size_t noisy_target_position(std::size_t n) { return (n + 1) / 2 - 1; }

// k copies of the ngram with the target word swapped for a uniformly drawn
// non-reserved word different from the original.
std::vector<std::vector<std::size_t>> sample_noisy(std::span<const std::size_t> ids, const Vocabulary& vocab,
                                                   std::size_t k, Rng& rng);

// tanh hidden layer with two linear heads: a context ranking score and a
// script score regression.
struct SsweModel {
  DenseMatrix hidden;  // H x n*dim
  DenseVector hidden_bias;
  DenseVector rank_head;
  double rank_bias = 0.0;
  DenseVector score_head;
  double score_bias = 0.0;
  double alpha = 0.1;
  std::size_t k_noisy = 20;
  std::size_t n = 3;

  std::size_t hidden_size() const { return hidden.rows(); }

  static SsweModel init(std::size_t n, std::size_t dim, std::size_t hidden, double alpha, std::size_t k_noisy,
                        double scale, std::uint64_t seed);

  ParamBundle parameters() const;
  static SsweModel from_parameters(const ParamBundle& params, std::size_t n, double alpha, std::size_t k_noisy);
};

struct SsweScores {
  double rank = 0.0;
  double script = 0.0;
};

SsweScores sswe_forward(const SsweModel& model, const EmbeddingMatrix& emb, std::span<const std::size_t> ids);

struct SsweExample {
  std::vector<std::size_t> ids;
  double gold_norm = 0.0;  // script score scaled to [0, 1]
  std::vector<std::vector<std::size_t>> noisy;
};

struct SsweGrads {
  DenseMatrix hidden;
  DenseVector hidden_bias;
  DenseVector rank_head;
  double rank_bias = 0.0;
  DenseVector score_head;
  double score_bias = 0.0;
  RowGrads embeddings;
};

struct SsweBatchResult {
  double loss = 0.0;
  double ranking_loss = 0.0;
  double score_loss = 0.0;
  SsweGrads grads;
};

// alpha * sum_k max(0, 1 - rank(correct) + rank(noisy_k)) + (1 - alpha) * (gold - score)^2,
// summed over the batch.
SsweBatchResult sswe_batch_loss_grads(const SsweModel& model, const EmbeddingMatrix& emb,
                                      std::span<const SsweExample> batch);

struct SsweResult {
  EmbeddingMatrix embeddings;
  SsweModel model;
  std::vector<double> epoch_losses;
};

SsweResult train_sswe(std::span<const Script> corpus, EmbeddingMatrix emb, const PretrainConfig& config,
                      const EpochCallback& on_epoch = {});

}  // namespace lexembed
