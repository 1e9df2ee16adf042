#include "lexembed/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lexembed/errors.hpp"

namespace lexembed {

Vocabulary::Vocabulary() {
  add(std::string(kUnknownWord));
  add(std::string(lexembed::kAnswerEnd));
}

void Vocabulary::add(std::string word) {
  const std::size_t idx = words_.size();
  if (!lookup_.emplace(word, idx).second) throw FormatError("duplicate vocabulary word '" + word + "'");
  words_.push_back(std::move(word));
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < 2 || words[0] != kUnknownWord || words[1] != lexembed::kAnswerEnd) {
    throw FormatError("vocabulary must start with the reserved words");
  }
  Vocabulary v;
  for (std::size_t i = 2; i < words.size(); ++i) v.add(std::move(words[i]));
  return v;
}

std::size_t Vocabulary::index(std::string_view word) const {
  const auto it = lookup_.find(std::string(word));
  return it == lookup_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view word) const { return lookup_.contains(std::string(word)); }

std::vector<std::size_t> Vocabulary::indices(std::span<const Token> tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(index(t.surface));
  return out;
}

Vocabulary build_vocab(std::span<const Script> corpus, std::size_t min_count) {
  if (min_count < 1) throw ParameterError("min_count must be at least 1");
  if (corpus.empty()) throw ParameterError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& script : corpus) {
    for (const auto& tok : script.tokens) ++counts[tok.surface];
    for (const auto& span : script.errors) {
      if (!span.correction) continue;
      for (const auto& w : *span.correction) ++counts[w];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [word, count] : counts) {
    if (count >= min_count && word != kUnknownWord && word != lexembed::kAnswerEnd) {
      ranked.emplace_back(word, count);
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words{std::string(kUnknownWord), std::string(lexembed::kAnswerEnd)};
  for (auto& [word, count] : ranked) words.push_back(std::move(word));
  return Vocabulary::from_words(std::move(words));
}

EmbeddingMatrix init_random(const Vocabulary& vocab, std::size_t dim, double scale, std::uint64_t seed) {
  return {vocab, uniform_init(vocab.size(), dim, scale, seed)};
}

namespace {

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw FormatError("unparsable number '" + std::string(field) + "'", line_no);
  }
  return v;
}

std::vector<std::pair<std::string, DenseVector>> parse_vector_lines(std::istream& in) {
  std::vector<std::pair<std::string, DenseVector>> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto stop = std::min(rest.find(' '), rest.size());
      fields.push_back(rest.substr(0, stop));
      rest.remove_prefix(stop);
    }
    if (fields.empty()) continue;
    if (fields.size() < 2) throw FormatError("vector line has no values", line_no);
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      throw FormatError("expected " + std::to_string(dim) + " values, found " +
                            std::to_string(fields.size() - 1),
                        line_no);
    }
    DenseVector v;
    v.reserve(dim);
    for (std::size_t i = 1; i < fields.size(); ++i) v.push_back(parse_double(fields[i], line_no));
    out.emplace_back(std::string(fields[0]), std::move(v));
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, DenseVector>> read_text_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vectors " + path.string());
  try {
    return parse_vector_lines(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  }
}

LoadedVectors load_text_vectors(const std::filesystem::path& path, const Vocabulary& vocab,
                                double random_scale, std::uint64_t seed) {
  const auto entries = read_text_vectors(path);
  if (entries.empty()) throw FormatError(path.string() + ": no vectors");
  const std::size_t dim = entries.front().second.size();

  LoadedVectors out;
  out.embeddings = init_random(vocab, dim, random_scale, seed);
  DenseMatrix& m = out.embeddings.matrix;
  std::vector<bool> covered(vocab.size(), false);
  DenseVector mean(dim, 0.0);
  bool explicit_unk = false;
  for (const auto& [word, vec] : entries) {
    axpy(1.0 / static_cast<double>(entries.size()), vec, mean);
    if (!vocab.contains(word)) continue;
    const std::size_t idx = vocab.index(word);
    std::copy(vec.begin(), vec.end(), m.row(idx).begin());
    covered[idx] = true;
    explicit_unk = explicit_unk || idx == Vocabulary::kUnk;
  }
  if (!explicit_unk) std::copy(mean.begin(), mean.end(), m.row(Vocabulary::kUnk).begin());
  for (std::size_t i = 2; i < vocab.size(); ++i) (covered[i] ? out.hits : out.misses)++;
  return out;
}

std::string format_text_vectors(const EmbeddingMatrix& emb) {
  if (emb.vocab.size() != emb.matrix.rows()) throw DimensionError("vocabulary and matrix disagree");
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < emb.vocab.size(); ++i) {
    out += emb.vocab.word(i);
    for (double v : emb.matrix.row(i)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

EmbeddingMatrix parse_text_vectors(std::string_view block) {
  std::istringstream in{std::string(block)};
  auto entries = parse_vector_lines(in);
  if (entries.empty()) throw FormatError("empty embedding block");
  std::vector<std::string> words;
  const std::size_t dim = entries.front().second.size();
  DenseMatrix m(entries.size(), dim);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    words.push_back(entries[i].first);
    std::copy(entries[i].second.begin(), entries[i].second.end(), m.row(i).begin());
  }
  return {Vocabulary::from_words(std::move(words)), std::move(m)};
}

void save_text_vectors(const EmbeddingMatrix& emb, const std::filesystem::path& path) {
  if (emb.vocab.non_reserved_size() == 0) throw ParameterError("refusing to save an empty vocabulary");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vectors " + path.string());
  out << format_text_vectors(emb);
  if (!out) throw IoError("write failed for " + path.string());
}

DenseVector lookup_ngram(const EmbeddingMatrix& emb, std::span<const std::size_t> ids) {
  const std::size_t d = emb.dim();
  DenseVector out(ids.size() * d);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= emb.matrix.rows()) {
      throw IndexError("embedding index " + std::to_string(ids[k]) + " out of range");
    }
    const auto row = emb.matrix.row(ids[k]);
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
  return out;
}

}  // namespace lexembed
