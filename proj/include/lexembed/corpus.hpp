#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexembed {

// Separator placed between the two answers of a script.
inline constexpr std::string_view kAnswerEnd = "answer_end";

struct Token {
  std::string surface;
  bool is_error = false;
  // Set on the first token of a replacement span; an empty list is a deletion.
  std::optional<std::vector<std::string>> correction;
  std::optional<std::string> error_type;

  friend bool operator==(const Token&, const Token&) = default;
};

// One <e> annotation. Tokens [begin, end) came from the <i> part. A span with
// begin == end is a missing-word error whose correction is inserted at begin.
struct ErrorSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::optional<std::vector<std::string>> correction;
  std::optional<std::string> type;

  bool is_insertion() const { return begin == end; }

  friend bool operator==(const ErrorSpan&, const ErrorSpan&) = default;
};

struct ScoreRange {
  double min = 1.0;
  double max = 40.0;

  double normalize(double score) const { return (score - min) / (max - min); }
  double denormalize(double unit) const { return min + unit * (max - min); }

  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

struct Script {
  std::string id;
  std::vector<Token> tokens;
  double gold_score = 0.0;
  ScoreRange score_range;
  std::vector<ErrorSpan> errors;

  friend bool operator==(const Script&, const Script&) = default;
};

struct NgramInstance {
  std::string script_id;
  std::size_t start = 0;
  std::size_t n = 0;
  double gold_error_score = 1.0;
};

struct CorpusStats {
  std::size_t script_count = 0;
  std::size_t token_count = 0;
  double error_token_ratio = 0.0;
  // Absent when per-script error ratios or scores have no variance.
  std::optional<double> score_error_spearman;
};

std::vector<std::string> tokenize(std::string_view text);

// Parses text carrying inline <e type="X"><i>..</i><c>..</c></e> annotations.
// Throws ParseError (with byte offset) on malformed or nested tags and
// ParameterError when the score lies outside the range or no tokens remain.
Script parse_annotated_script(std::string_view raw, std::string id, double gold_score,
                              ScoreRange range);

// Inverse of parse_annotated_script up to whitespace.
std::string render_annotated(const Script& script);

// Replaces every error with its correction. Errors that carry no correction
// keep their tokens (unflagged) and add a message to `warnings`.
Script build_corrected_script(const Script& script, std::vector<std::string>* warnings = nullptr);

// 1 / (1 + number of flagged tokens).
double ngram_gold_score(std::span<const Token> window);

bool is_separator(const Token& token);

// Contiguous windows of length n with no padding; windows that contain the
// answer separator are skipped.
std::vector<NgramInstance> extract_ngrams(const Script& script, std::size_t n);

CorpusStats compute_stats(std::span<const Script> corpus);

// Joins answers with the separator token.
std::string join_answers(std::span<const std::string> answers);

nlohmann::json script_to_json(const Script& script);
Script script_from_json(const nlohmann::json& j);

std::vector<Script> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, std::span<const Script> corpus);

nlohmann::json stats_to_json(const CorpusStats& stats);

struct SyntheticParams {
  std::size_t vocab_size = 200;
  std::size_t script_count = 50;
  std::size_t mean_len = 80;
  double error_rate_lo = 0.0;
  double error_rate_hi = 0.3;
  std::uint64_t seed = 1;
  ScoreRange score_range{1.0, 40.0};
};

// Scripts drawn from a seeded bigram language. Each planted error replaces a
// token and records the original as its correction; the gold score falls
// linearly with the realised error ratio plus Gaussian noise.
std::vector<Script> generate_synthetic_corpus(const SyntheticParams& params);

}  // namespace lexembed
