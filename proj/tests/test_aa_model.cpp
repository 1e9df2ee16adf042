#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lexembed/aa_model.hpp"
#include "lexembed/errors.hpp"
#include "lexembed/metrics.hpp"

using namespace lexembed;

namespace {

const Vocabulary& abc_vocab() {
  static const auto v = Vocabulary::from_words({"<unk>", "answer_end", "a", "b", "c", "d"});
  return v;
}

AaModel zero_model(std::size_t m, std::size_t h, std::size_t d) {
  AaModel model;
  model.m = m;
  model.filter = DenseMatrix(h, m * d);
  model.filter_bias.assign(h, 0.0);
  model.head.assign(h, 0.0);
  return model;
}

std::vector<Script> synthetic(std::uint64_t seed, std::size_t count, const std::string& prefix) {
  SyntheticParams p;
  p.vocab_size = 80;
  p.script_count = count;
  p.mean_len = 40;
  p.seed = seed;
  auto corpus = generate_synthetic_corpus(p);
  for (auto& s : corpus) s.id = prefix + s.id;
  return corpus;
}

}  // namespace

TEST_CASE("aa_forward hand traces") {
  const EmbeddingMatrix emb{abc_vocab(), DenseMatrix(6, 1, {0, 0, 1, -2, 3, 0.5})};
  auto model = zero_model(1, 1, 1);
  model.head_bias = 0.3;
  const IndexedScript s{"s", {2, 3, 4}, 0.5};
  CHECK(aa_forward(model, emb, s).pred_norm == 0.3);

  // h=1, m=1, d=1: M = relu(2x - 1) = [1, 0, 5]; S = 2; pred = 0.5 * 2 + 0.1
  model.filter = DenseMatrix(1, 1, {2.0});
  model.filter_bias = {-1.0};
  model.head = {0.5};
  model.head_bias = 0.1;
  const auto out = aa_forward(model, emb, s);
  CHECK(out.pooled == std::vector<double>{2.0});
  CHECK(out.pred_norm == doctest::Approx(1.1));

  // l = m: a single position, S is that column.
  auto wide = zero_model(3, 2, 1);
  wide.filter = DenseMatrix(2, 3, {1, 1, 1, -1, 0, 0});
  const auto single = aa_forward(wide, emb, s);
  CHECK(single.pooled == std::vector<double>{2.0, 0.0});

  const IndexedScript shorty{"short-one", {2, 3}, 0.5};
  try {
    aa_forward(wide, emb, shorty);
    FAIL("no error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("short-one") != std::string::npos);
  }
}

TEST_CASE("pooling ignores the order of windows") {
  const EmbeddingMatrix emb = init_random(abc_vocab(), 3, 1.0, 2);
  AaModelConfig cfg;
  cfg.m = 1;
  cfg.h = 4;
  cfg.init_scale = 1.0;
  const auto model = AaModel::init(cfg, 3);
  const IndexedScript a{"a", {2, 3, 4, 5}, 0.0};
  const IndexedScript b{"b", {5, 3, 2, 4}, 0.0};
  CHECK(aa_forward(model, emb, a).pred_norm == doctest::Approx(aa_forward(model, emb, b).pred_norm).epsilon(1e-14));
  cfg.m = 2;
  const auto pairs = AaModel::init(cfg, 3);
  CHECK(aa_forward(pairs, emb, a).pred_norm != aa_forward(pairs, emb, b).pred_norm);
}

TEST_CASE("aa batch loss fixtures") {
  const EmbeddingMatrix emb{abc_vocab(), DenseMatrix(6, 1, {0, 0, 1, -2, 3, 0.5})};
  auto model = zero_model(1, 2, 1);
  model.head_bias = 0.4;
  const std::vector<IndexedScript> batch = {{"x", {2, 3}, 0.4}, {"y", {4, 5}, 0.4}};
  const auto r = aa_batch_loss_grads(model, emb, batch, 0.0);
  CHECK(r.loss == 0.0);
  CHECK(r.grads.head_bias == 0.0);
  for (double g : r.grads.filter.values()) CHECK(g == 0.0);

  // Zero data error isolates the regulariser.
  model.filter = DenseMatrix(2, 1, {-1.0, -2.0});  // all units inactive on positive words
  model.head = {0.7, -0.3};
  const std::vector<IndexedScript> pos = {{"x", {2, 4}, 0.4}};
  const auto reg = aa_batch_loss_grads(model, emb, pos, 0.01);
  CHECK(reg.data_loss == 0.0);
  CHECK(reg.grads.filter(0, 0) == doctest::Approx(2 * 0.01 * -1.0));
  CHECK(reg.grads.filter(1, 0) == doctest::Approx(2 * 0.01 * -2.0));
  CHECK(reg.grads.head[0] == doctest::Approx(2 * 0.01 * 0.7));
  CHECK(reg.grads.head[1] == doctest::Approx(2 * 0.01 * -0.3));
  CHECK(reg.grads.head_bias == 0.0);
  CHECK(reg.grads.filter_bias == std::vector<double>{0.0, 0.0});
  CHECK(reg.loss == doctest::Approx(0.01 * (1 + 4 + 0.49 + 0.09)));
}

TEST_CASE("aa gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    CAPTURE(seed);
    for (bool frozen : {false, true}) {
      const auto c = fixtures::aa_case(seed, frozen);
      for (const auto& r : finite_diff_check(c.loss, c.params, c.grads, 1e-5, 1e-4)) {
        INFO(r.param_name << " rel err " << r.max_rel_err);
        CHECK(r.pass);
      }
      CHECK(c.grads.contains("embeddings") == !frozen);
    }
  }
}

TEST_CASE("a small SGD step lowers the batch loss") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = fixtures::aa_case(seed, false, 0.0);
    ParamBundle stepped = c.params;
    for (auto& [name, p] : stepped) p = sgd_update(p, c.grads.at(name), 1e-4);
    CHECK(c.loss(stepped) < c.loss(c.params));
  }
}

TEST_CASE("train_aa keeps the best dev snapshot") {
  const auto train = synthetic(1, 40, "tr-");
  const auto dev = synthetic(2, 15, "dv-");
  const auto emb = init_random(build_vocab(train, 1), 8, 0.1, 1);
  AaModelConfig mc;
  mc.h = 10;
  AaTrainConfig tc;
  tc.epochs = 8;
  tc.lr = 0.005;
  int calls = 0;
  const auto r = train_aa(train, dev, emb, mc, tc, [&](const AaEpochRecord&) { ++calls; });
  REQUIRE(r.history.size() == 8);
  CHECK(calls == 8);
  for (const auto& h : r.history) CHECK(r.best_dev_mse <= h.dev_mse);
  CHECK(r.history[r.best_epoch - 1].dev_mse == r.best_dev_mse);
  for (int e = 0; e < r.best_epoch - 1; ++e) CHECK(r.history[e].dev_mse > r.best_dev_mse);

  std::vector<IndexedScript> dev_set;
  for (const auto& s : dev) dev_set.push_back(index_script(s, r.embeddings.vocab));
  CHECK(mse(r.model, r.embeddings, dev_set) == r.best_dev_mse);

  const auto again = train_aa(train, dev, emb, mc, tc);
  CHECK(again.model.filter == r.model.filter);
  CHECK(again.embeddings.matrix == r.embeddings.matrix);

  mc.frozen_embeddings = true;
  const auto frozen = train_aa(train, dev, emb, mc, tc);
  CHECK(frozen.embeddings.matrix == emb.matrix);
}

TEST_CASE("train_aa input validation") {
  const auto train = synthetic(1, 5, "tr-");
  const auto emb = init_random(build_vocab(train, 1), 4, 0.1, 1);
  AaModelConfig mc;
  mc.h = 3;
  AaTrainConfig tc;
  tc.epochs = 1;
  CHECK_THROWS_AS(train_aa(train, train, emb, mc, tc), ParameterError);
  CHECK_THROWS_AS(train_aa(train, std::vector<Script>{}, emb, mc, tc), ParameterError);
  const std::vector<Script> tiny = {fixtures::script("a b", 5, "tiny")};
  mc.m = 3;
  CHECK_THROWS_AS(train_aa(train, tiny, emb, mc, tc), InputError);
  tc.l2 = -1;
  CHECK_THROWS_AS(tc.validate(), ParameterError);
  mc.h = 0;
  CHECK_THROWS_AS(mc.validate(), ParameterError);
}

TEST_CASE("predict clamps and rescales") {
  const EmbeddingMatrix emb{abc_vocab(), DenseMatrix(6, 1, {0, 0, 1, -2, 3, 0.5})};
  auto model = zero_model(1, 1, 1);
  const auto s = fixtures::script("a b c", 10.0);
  model.head_bias = 0.5;
  CHECK(predict(model, emb, s) == 20.5);
  model.head_bias = -0.2;
  CHECK(predict(model, emb, s) == 1.0);
  model.head_bias = 1.7;
  CHECK(predict(model, emb, s) == 40.0);
  model.head_bias = 0.3;
  CHECK(s.score_range.normalize(predict(model, emb, s)) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("planted errors lower predicted scores") {
  const auto train = synthetic(11, 120, "tr-");
  const auto dev = synthetic(12, 30, "dv-");
  const auto emb = init_random(build_vocab(train, 1), 10, 0.1, 3);
  AaModelConfig mc;
  mc.h = 20;
  AaTrainConfig tc;
  tc.epochs = 15;
  tc.lr = 0.003;
  const auto r = train_aa(train, dev, emb, mc, tc);

  // Replace a quarter of each dev script with a word the model saw only as an error.
  std::vector<std::string> misspelt;
  for (const auto& t : train) {
    for (const auto& tok : t.tokens) {
      if (tok.is_error && tok.correction) misspelt.push_back(tok.surface);
    }
  }
  Rng rng(5);
  double clean = 0.0, corrupted = 0.0;
  for (const auto& s : dev) {
    clean += predict(r.model, r.embeddings, s);
    Script bad = s;
    for (auto& tok : bad.tokens) {
      if (!is_separator(tok) && rng.bernoulli(0.25)) tok.surface = misspelt[rng.below(misspelt.size())];
    }
    corrupted += predict(r.model, r.embeddings, bad);
  }
  CHECK(corrupted < clean);
}
