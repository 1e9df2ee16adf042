#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lexembed/aa_model.hpp"
#include "lexembed/corpus.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/numeric.hpp"
#include "lexembed/pretrain.hpp"
#include "lexembed/rng.hpp"

namespace fixtures {

using namespace lexembed;

inline const std::vector<std::string>& small_words() {
  static const std::vector<std::string> words = {"the", "cat", "sat", "on", "a",   "mat", "dog",
                                                 "ran", "to",  "big", "red", "hat", "was", "in"};
  return words;
}

inline Script script(std::string_view text, double score = 20.0, std::string id = "s") {
  return parse_annotated_script(text, std::move(id), score, ScoreRange{1.0, 40.0});
}

// Random annotated text of `len` plain tokens, each wrapped in a replacement
// error with probability `error_rate`.
inline std::string random_annotated(Rng& rng, std::size_t len, double error_rate) {
  const auto& words = small_words();
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (!out.empty()) out += ' ';
    const auto& w = words[rng.below(words.size())];
    if (rng.bernoulli(error_rate)) {
      out += "<e type=\"S\"><i>" + w + "</i><c>" + words[rng.below(words.size())] + "</c></e>";
    } else {
      out += w;
    }
  }
  return out;
}

inline std::vector<Script> random_corpus(Rng& rng, std::size_t count, std::size_t min_len, std::size_t max_len,
                                         double error_rate) {
  std::vector<Script> corpus;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = min_len + rng.below(max_len - min_len + 1);
    const double score = rng.uniform(1.0, 40.0);
    corpus.push_back(script(random_annotated(rng, len, error_rate), score, "r" + std::to_string(i)));
  }
  return corpus;
}

// A loss over a named parameter bundle plus the analytic gradients at the
// bundle's current point. "embeddings" holds the full |V| x d matrix.
struct GradCase {
  ParamBundle params;
  ParamBundle grads;
  BundleLoss loss;
};

inline EmbeddingMatrix with_matrix(const EmbeddingMatrix& emb, const DenseMatrix& matrix) {
  return {emb.vocab, matrix};
}

inline GradCase eswe_case(std::uint64_t seed, bool with_corrected) {
  Rng rng(seed);
  const std::size_t n = 1 + rng.below(3);
  const std::size_t d = 2 + rng.below(4);
  const auto corpus = random_corpus(rng, 2, std::max<std::size_t>(n, 4), 12, 0.3);
  const auto vocab = build_vocab(corpus, 1);
  const auto emb = init_random(vocab, d, 0.5, seed + 11);
  // Larger filter scale spreads predictions away from 0.5.
  auto model = EsweModel::init(n, d, 0.5, seed + 12);

  std::vector<IndexedNgram> batch;
  for (const auto& s : corpus) {
    for (auto& ng : index_ngrams(s, vocab, n)) batch.push_back(std::move(ng));
    if (with_corrected) {
      for (auto& ng : index_ngrams(build_corrected_script(s), vocab, n)) batch.push_back(std::move(ng));
    }
  }
  const auto res = eswe_batch_loss_grads(model, emb, batch);

  GradCase c;
  c.params = model.parameters();
  c.params["embeddings"] = emb.matrix;
  c.grads = {{"eswe.filter", res.grads.filter},
             {"eswe.bias", DenseMatrix(1, 1, res.grads.bias)},
             {"embeddings", densify(res.grads.embeddings, emb.matrix.rows(), d)}};
  c.loss = [emb, batch, n](const ParamBundle& p) {
    return eswe_batch_loss_grads(EsweModel::from_parameters(p, n), with_matrix(emb, p.at("embeddings")), batch).loss;
  };
  return c;
}

// Keeps every hinge at least `gap` away from its kink so the central
// difference never straddles it.
inline bool hinges_clear(const SsweModel& model, const EmbeddingMatrix& emb, std::span<const SsweExample> batch,
                         double gap) {
  for (const auto& ex : batch) {
    const double rank = sswe_forward(model, emb, ex.ids).rank;
    for (const auto& noisy : ex.noisy) {
      if (std::abs(1.0 - rank + sswe_forward(model, emb, noisy).rank) < gap) return false;
    }
  }
  return true;
}

inline GradCase sswe_case(std::uint64_t seed, double alpha = -1.0) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed * 1000 + attempt);
    const std::size_t n = 1 + rng.below(3);
    const std::size_t d = 2 + rng.below(4);
    const std::size_t hidden = 1 + rng.below(4);
    const auto corpus = random_corpus(rng, 2, std::max<std::size_t>(n, 4), 12, 0.2);
    const auto vocab = build_vocab(corpus, 1);
    if (vocab.non_reserved_size() < 3) continue;
    const auto emb = init_random(vocab, d, 0.5, rng.next());
    const double a = alpha >= 0.0 ? alpha : rng.uniform(0.05, 0.95);
    // A wide init puts some noisy ranks above the margin and others below.
    auto model = SsweModel::init(n, d, hidden, a, 3, 1.0, rng.next());

    std::vector<SsweExample> batch;
    for (const auto& s : corpus) {
      const double gold = s.score_range.normalize(s.gold_score);
      for (auto& ng : index_ngrams(s, vocab, n)) {
        SsweExample ex{std::move(ng.ids), gold, {}};
        ex.noisy = sample_noisy(ex.ids, vocab, 3, rng);
        batch.push_back(std::move(ex));
      }
    }
    if (batch.size() > 6) batch.resize(6);
    if (!hinges_clear(model, emb, batch, 1e-3)) continue;

    const auto res = sswe_batch_loss_grads(model, emb, batch);
    const std::size_t h = model.hidden_size();
    GradCase c;
    c.params = model.parameters();
    c.params["embeddings"] = emb.matrix;
    c.grads = {{"sswe.hidden", res.grads.hidden},
               {"sswe.hidden_bias", DenseMatrix(1, h, res.grads.hidden_bias)},
               {"sswe.rank_head", DenseMatrix(1, h, res.grads.rank_head)},
               {"sswe.rank_bias", DenseMatrix(1, 1, res.grads.rank_bias)},
               {"sswe.score_head", DenseMatrix(1, h, res.grads.score_head)},
               {"sswe.score_bias", DenseMatrix(1, 1, res.grads.score_bias)},
               {"embeddings", densify(res.grads.embeddings, emb.matrix.rows(), d)}};
    c.loss = [emb, batch, n, a](const ParamBundle& p) {
      return sswe_batch_loss_grads(SsweModel::from_parameters(p, n, a, 3), with_matrix(emb, p.at("embeddings")), batch)
          .loss;
    };
    return c;
  }
}

// Keeps every convolution unit at least `gap` away from the ReLU kink.
inline bool relu_clear(const AaModel& model, const EmbeddingMatrix& emb, std::span<const IndexedScript> batch,
                       double gap) {
  for (const auto& s : batch) {
    for (std::size_t pos = 0; pos + model.m <= s.ids.size(); ++pos) {
      const auto x = lookup_ngram(emb, std::span(s.ids).subspan(pos, model.m));
      for (std::size_t i = 0; i < model.feature_maps(); ++i) {
        if (std::abs(dot(model.filter.row(i), x) + model.filter_bias[i]) < gap) return false;
      }
    }
  }
  return true;
}

inline GradCase aa_case(std::uint64_t seed, bool frozen = false, double l2 = -1.0) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed * 1000 + attempt);
    AaModelConfig cfg;
    cfg.m = 1 + rng.below(3);
    cfg.h = 1 + rng.below(4);
    cfg.init_scale = 0.5;
    cfg.seed = rng.next();
    cfg.frozen_embeddings = frozen;
    const std::size_t d = 2 + rng.below(4);
    const auto corpus = random_corpus(rng, 3, std::max<std::size_t>(cfg.m, 3), 12, 0.2);
    const auto vocab = build_vocab(corpus, 1);
    const auto emb = init_random(vocab, d, 0.5, rng.next());
    const auto model = AaModel::init(cfg, d);
    std::vector<IndexedScript> batch;
    for (const auto& s : corpus) batch.push_back(index_script(s, vocab));
    if (!relu_clear(model, emb, batch, 1e-3)) continue;
    const double rate = l2 >= 0.0 ? l2 : rng.uniform(0.0, 0.1);

    const auto res = aa_batch_loss_grads(model, emb, batch, rate);
    const std::size_t h = model.feature_maps();
    GradCase c;
    c.params = model.parameters();
    c.grads = {{"aa.filter", res.grads.filter},
               {"aa.filter_bias", DenseMatrix(1, h, res.grads.filter_bias)},
               {"aa.head", DenseMatrix(1, h, res.grads.head)},
               {"aa.head_bias", DenseMatrix(1, 1, res.grads.head_bias)}};
    if (!frozen) {
      c.params["embeddings"] = emb.matrix;
      c.grads["embeddings"] = densify(res.grads.embeddings, emb.matrix.rows(), d);
    }
    const std::size_t m = cfg.m;
    c.loss = [emb, batch, m, frozen, rate](const ParamBundle& p) {
      const auto model = AaModel::from_parameters(p, m, frozen);
      const auto e = frozen ? emb : with_matrix(emb, p.at("embeddings"));
      return aa_batch_loss_grads(model, e, batch, rate).loss;
    };
    return c;
  }
}

}  // namespace fixtures
