#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/errors.hpp"

using namespace lexembed;
using fixtures::script;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("lexembed_emb_" + name);
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("build_vocab orders by frequency then spelling") {
  const std::vector<Script> corpus = {script("a a b")};
  const auto v = build_vocab(corpus, 1);
  CHECK(v.words() == std::vector<std::string>{"<unk>", "answer_end", "a", "b"});
  const auto v2 = build_vocab(corpus, 2);
  CHECK(v2.words() == std::vector<std::string>{"<unk>", "answer_end", "a"});
  CHECK(v2.index("b") == Vocabulary::kUnk);
  CHECK(v2.index("answer_end") == Vocabulary::kAnswerEnd);

  const std::vector<Script> same_profile = {script("y x y z z z")};
  const std::vector<Script> renamed = {script("q p q r r r")};
  CHECK(build_vocab(same_profile, 1).words() == std::vector<std::string>{"<unk>", "answer_end", "z", "y", "x"});
  CHECK(build_vocab(renamed, 1).words() == std::vector<std::string>{"<unk>", "answer_end", "r", "q", "p"});

  CHECK_THROWS_AS(build_vocab(std::vector<Script>{}, 1), ParameterError);
  CHECK_THROWS_AS(build_vocab(corpus, 0), ParameterError);
}

TEST_CASE("build_vocab includes correction words") {
  const std::vector<Script> corpus = {script("I went <e><i>in</i><c>to the</c></e> shop")};
  const auto v = build_vocab(corpus, 1);
  CHECK(v.contains("to"));
  CHECK(v.contains("the"));
  CHECK(v.contains("in"));
}

TEST_CASE("every token maps to a valid row") {
  Rng rng(4);
  const auto corpus = fixtures::random_corpus(rng, 10, 3, 12, 0.3);
  const auto vocab = build_vocab(corpus, 3);
  for (const auto& s : corpus) {
    for (auto id : vocab.indices(s.tokens)) CHECK(id < vocab.size());
  }
  CHECK(vocab.index("never-seen") == Vocabulary::kUnk);
}

TEST_CASE("Vocabulary::from_words validation") {
  CHECK_THROWS_AS(Vocabulary::from_words({"a", "b"}), FormatError);
  CHECK_THROWS_AS(Vocabulary::from_words({"<unk>", "answer_end", "a", "a"}), FormatError);
  CHECK(Vocabulary::from_words({"<unk>", "answer_end"}).non_reserved_size() == 0);
}

TEST_CASE("init_random rows") {
  const auto vocab = Vocabulary::from_words({"<unk>", "answer_end", "a"});
  const auto e = init_random(vocab, 4, 0.1, 3);
  CHECK(e.matrix.rows() == 3);
  CHECK(e.dim() == 4);
  for (double v : e.matrix.values()) CHECK(std::abs(v) <= 0.1);
  CHECK(e.matrix == init_random(vocab, 4, 0.1, 3).matrix);
  CHECK_THROWS_AS(init_random(vocab, 4, 0.0, 3), ParameterError);
  CHECK_THROWS_AS(init_random(vocab, 0, 0.1, 3), DimensionError);
}

TEST_CASE("load_text_vectors") {
  const auto vocab = Vocabulary::from_words({"<unk>", "answer_end", "cat", "dog", "emu"});
  const auto path = write_file("two.txt", "cat 1 2 3\ndog -1 0.5 4\n");
  const auto loaded = load_text_vectors(path, vocab, 0.05, 9);
  const auto& m = loaded.embeddings.matrix;
  CHECK(loaded.embeddings.dim() == 3);
  CHECK(std::vector<double>(m.row(2).begin(), m.row(2).end()) == std::vector<double>{1, 2, 3});
  CHECK(std::vector<double>(m.row(3).begin(), m.row(3).end()) == std::vector<double>{-1, 0.5, 4});
  CHECK(std::vector<double>(m.row(0).begin(), m.row(0).end()) == std::vector<double>{0, 1.25, 3.5});
  CHECK(loaded.hits == 2);
  CHECK(loaded.misses == 1);
  for (double v : m.row(4)) CHECK(std::abs(v) <= 0.05);
  CHECK(load_text_vectors(path, vocab, 0.05, 9).embeddings.matrix == m);

  const auto with_unk = write_file("unk.txt", "<unk> 9 9 9\ncat 1 2 3\n");
  const auto u = load_text_vectors(with_unk, vocab).embeddings.matrix;
  CHECK(u(0, 0) == 9.0);

  const auto ragged = write_file("ragged.txt", "cat 1 2 3\ndog 1 2\n");
  try {
    load_text_vectors(ragged, vocab);
    FAIL("no error");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
  const auto junk = write_file("junk.txt", "cat 1 2 x\n");
  CHECK_THROWS_AS(load_text_vectors(junk, vocab), FormatError);
  CHECK_THROWS_AS(load_text_vectors("/nonexistent/vectors.txt", vocab), IoError);
  for (const auto& p : {path, with_unk, ragged, junk}) std::filesystem::remove(p);
}

TEST_CASE("save and reload vectors") {
  const auto vocab = Vocabulary::from_words({"<unk>", "answer_end", "a", "b", "c", "d", "e", "f", "g", "h"});
  const auto emb = init_random(vocab, 5, 1.0, 12);
  const auto path = std::filesystem::temp_directory_path() / "lexembed_emb_roundtrip.txt";
  save_text_vectors(emb, path);
  const auto back = load_text_vectors(path, vocab);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < emb.matrix.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(emb.matrix.values()[i] - back.embeddings.matrix.values()[i]));
  }
  CHECK(max_diff < 1e-10);
  CHECK(back.embeddings.matrix == emb.matrix);

  const auto lines = read_text_vectors(path);
  REQUIRE(lines.size() == vocab.size());
  for (std::size_t i = 0; i < lines.size(); ++i) CHECK(lines[i].first == vocab.word(i));

  const auto parsed = parse_text_vectors(format_text_vectors(emb));
  CHECK(parsed.vocab == emb.vocab);
  CHECK(parsed.matrix == emb.matrix);

  const EmbeddingMatrix empty{Vocabulary(), DenseMatrix(2, 3)};
  CHECK_THROWS_AS(save_text_vectors(empty, path), ParameterError);
  std::filesystem::remove(path);
}

TEST_CASE("lookup_ngram concatenates rows") {
  const auto vocab = Vocabulary::from_words({"<unk>", "answer_end", "a", "b", "c", "d"});
  EmbeddingMatrix emb = init_random(vocab, 3, 1.0, 5);
  const auto row = [&](std::size_t i) { return std::vector<double>(emb.matrix.row(i).begin(), emb.matrix.row(i).end()); };
  const std::vector<std::size_t> ab = {2, 3};
  auto expect = row(2);
  const auto b = row(3);
  expect.insert(expect.end(), b.begin(), b.end());
  CHECK(lookup_ngram(emb, ab) == expect);
  const std::vector<std::size_t> one = {4};
  CHECK(lookup_ngram(emb, one) == row(4));
  const std::vector<std::size_t> twice = {5, 5};
  auto dup = row(5);
  const auto r5 = row(5);
  dup.insert(dup.end(), r5.begin(), r5.end());
  CHECK(lookup_ngram(emb, twice) == dup);
  const std::vector<std::size_t> bad = {6};
  CHECK_THROWS_AS(lookup_ngram(emb, bad), IndexError);
}
