#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexembed/corpus.hpp"
#include "lexembed/numeric.hpp"

namespace lexembed {

inline constexpr std::string_view kUnknownWord = "<unk>";

class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kAnswerEnd = 1;

  // Holds only the two reserved entries.
  Vocabulary();

  // Rebuilds from an ordered word list whose first two entries are the
  // reserved words. Throws FormatError on duplicates or missing reserved words.
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  std::size_t non_reserved_size() const { return words_.size() - 2; }

  // Unknown words map to kUnk.
  std::size_t index(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const { return words_; }

  std::vector<std::size_t> indices(std::span<const Token> tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  void add(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Counts original tokens plus the words of every correction, so corrected
// scripts index without falling back to UNK. Order: frequency desc, then
// lexicographic.
Vocabulary build_vocab(std::span<const Script> corpus, std::size_t min_count);

struct EmbeddingMatrix {
  Vocabulary vocab;
  DenseMatrix matrix;  // |V| x dim

  std::size_t dim() const { return matrix.cols(); }
};

EmbeddingMatrix init_random(const Vocabulary& vocab, std::size_t dim, double scale, std::uint64_t seed);

struct LoadedVectors {
  EmbeddingMatrix embeddings;
  std::size_t hits = 0;
  std::size_t misses = 0;  // non-reserved vocabulary words absent from the file
};

// GloVe-style text vectors. Vocabulary words absent from the file get seeded
// random rows; UNK takes the file's "<unk>" row if present, otherwise the mean
// of every vector read.
LoadedVectors load_text_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                double random_scale = 0.05, std::uint64_t seed = 0);

// Parses every line of a vector file, in file order.
std::vector<std::pair<std::string, DenseVector>> read_text_vectors(const std::filesystem::path& path);

void save_text_vectors(const EmbeddingMatrix& emb, const std::filesystem::path& path);

// One row per vocabulary entry in index order, 17 significant digits.
std::string format_text_vectors(const EmbeddingMatrix& emb);
EmbeddingMatrix parse_text_vectors(std::string_view block);

// Concatenated rows, length ids.size() * dim.
DenseVector lookup_ngram(const EmbeddingMatrix& emb, std::span<const std::size_t> ids);

}  // namespace lexembed
