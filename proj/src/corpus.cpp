#include "lexembed/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lexembed/errors.hpp"
#include "lexembed/metrics.hpp"

namespace lexembed {

namespace {

bool is_split_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?': case ';': case ':':
    case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t lo = 0;
  std::size_t hi = chunk.size();
  while (lo < hi && is_split_punct(chunk[lo])) {
    out.emplace_back(1, chunk[lo]);
    ++lo;
  }
  std::size_t trail = hi;
  while (trail > lo && is_split_punct(chunk[trail - 1])) --trail;
  if (trail > lo) out.emplace_back(chunk.substr(lo, trail - lo));
  for (std::size_t i = trail; i < hi; ++i) out.emplace_back(1, chunk[i]);
}

// Recursive-descent reader for the annotation markup. Text outside <e>
// elements is tokenized as-is; any other '<' is an error.
class AnnotationParser {
 public:
  explicit AnnotationParser(std::string_view raw) : raw_(raw) {}

  void parse(Script& script) {
    while (pos_ < raw_.size()) {
      const std::size_t lt = raw_.find('<', pos_);
      const std::size_t text_end = lt == std::string_view::npos ? raw_.size() : lt;
      push_plain(script, raw_.substr(pos_, text_end - pos_));
      pos_ = text_end;
      if (lt == std::string_view::npos) break;
      parse_error_element(script);
    }
    if (!pending_.empty()) {
      // Missing word at the very end of the text: the last token carries the flag.
      if (script.tokens.empty()) throw ParseError("missing-word error with no anchor token", pos_);
      auto& last = script.tokens.back();
      last.is_error = true;
      if (!last.error_type) last.error_type = script.errors[pending_.front()].type;
      pending_.clear();
    }
  }

 private:
  bool starts_with(std::string_view lit) const { return raw_.substr(pos_, lit.size()) == lit; }

  void skip_space() {
    while (pos_ < raw_.size() && is_space(raw_[pos_])) ++pos_;
  }

  void expect(std::string_view lit) {
    if (!starts_with(lit)) {
      throw ParseError("expected " + std::string(lit), pos_);
    }
    pos_ += lit.size();
  }

  // Reads up to the next '<', which must open the closing tag `close`.
  std::string_view read_content(std::string_view close) {
    const std::size_t start = pos_;
    const std::size_t lt = raw_.find('<', pos_);
    if (lt == std::string_view::npos) {
      throw ParseError("unterminated element, expected " + std::string(close), start);
    }
    pos_ = lt;
    if (starts_with("<e>") || starts_with("<e ")) throw ParseError("nested <e> element", pos_);
    if (!starts_with(close)) throw ParseError("expected " + std::string(close), pos_);
    const auto content = raw_.substr(start, lt - start);
    pos_ += close.size();
    return content;
  }

  std::optional<std::string> parse_open_tag() {
    const std::size_t open = pos_;
    if (!(starts_with("<e>") || starts_with("<e "))) {
      throw ParseError("unexpected tag outside an error element", open);
    }
    pos_ += 2;
    std::optional<std::string> type;
    skip_space();
    if (starts_with("type=\"")) {
      pos_ += 6;
      const std::size_t close_quote = raw_.find('"', pos_);
      if (close_quote == std::string_view::npos) throw ParseError("unterminated type attribute", pos_);
      const auto value = raw_.substr(pos_, close_quote - pos_);
      if (value.find_first_of("<>") != std::string_view::npos) {
        throw ParseError("malformed type attribute", pos_);
      }
      type = std::string(value);
      pos_ = close_quote + 1;
      skip_space();
    }
    if (!starts_with(">")) throw ParseError("malformed <e> tag", open);
    ++pos_;
    return type;
  }

  void parse_error_element(Script& script) {
    auto type = parse_open_tag();
    skip_space();
    expect("<i>");
    const auto original = tokenize(read_content("</i>"));
    skip_space();
    std::optional<std::vector<std::string>> correction;
    if (starts_with("<c>")) {
      pos_ += 3;
      correction = tokenize(read_content("</c>"));
    }
    skip_space();
    expect("</e>");

    if (original.empty()) {
      if (!correction || correction->empty()) return;  // nothing to record
      pending_.push_back(script.errors.size());
      script.errors.push_back({script.tokens.size(), script.tokens.size(), std::move(correction), type});
      return;
    }
    const std::size_t begin = script.tokens.size();
    for (std::size_t k = 0; k < original.size(); ++k) {
      Token tok{original[k], true, std::nullopt, type};
      if (k == 0) tok.correction = correction;
      push_token(script, std::move(tok));
    }
    script.errors.push_back({begin, script.tokens.size(), std::move(correction), std::move(type)});
  }

  void push_plain(Script& script, std::string_view text) {
    for (auto& surface : tokenize(text)) push_token(script, Token{std::move(surface), false, std::nullopt, std::nullopt});
  }

  void push_token(Script& script, Token tok) {
    if (!pending_.empty()) {
      tok.is_error = true;
      if (!tok.error_type) tok.error_type = script.errors[pending_.front()].type;
      pending_.clear();
    }
    script.tokens.push_back(std::move(tok));
  }

  std::string_view raw_;
  std::size_t pos_ = 0;
  std::vector<std::size_t> pending_;  // insertion spans waiting for an anchor token
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string render_span(const Script& script, const ErrorSpan& span) {
  std::string out = "<e";
  if (span.type) out += " type=\"" + *span.type + "\"";
  out += "><i>";
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (i > span.begin) out += ' ';
    out += script.tokens[i].surface;
  }
  out += "</i>";
  if (span.correction) out += "<c>" + join(*span.correction) + "</c>";
  out += "</e>";
  return out;
}

// Walks tokens and spans in text order. on_insert fires for missing-word
// spans, on_span for replacement spans, on_token for untouched tokens.
template <typename OnInsert, typename OnSpan, typename OnToken>
void walk_script(const Script& script, OnInsert on_insert, OnSpan on_span, OnToken on_token) {
  std::size_t si = 0;
  std::size_t p = 0;
  const std::size_t len = script.tokens.size();
  while (true) {
    while (si < script.errors.size() && script.errors[si].begin == p &&
           script.errors[si].is_insertion()) {
      on_insert(script.errors[si++]);
    }
    if (p >= len) break;
    if (si < script.errors.size() && script.errors[si].begin == p) {
      const auto& span = script.errors[si++];
      on_span(span);
      p = span.end;
    } else {
      on_token(script.tokens[p]);
      ++p;
    }
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) split_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

Script parse_annotated_script(std::string_view raw, std::string id, double gold_score,
                              ScoreRange range) {
  if (!(range.min < range.max)) throw ParameterError("score range of '" + id + "' is empty");
  if (!(gold_score >= range.min && gold_score <= range.max)) {
    throw ParameterError("score of '" + id + "' lies outside its range");
  }
  Script script;
  script.id = std::move(id);
  script.gold_score = gold_score;
  script.score_range = range;
  AnnotationParser(raw).parse(script);
  if (script.tokens.empty()) throw ParameterError("script '" + script.id + "' has no tokens");
  return script;
}

std::string render_annotated(const Script& script) {
  std::vector<std::string> pieces;
  walk_script(
      script, [&](const ErrorSpan& span) { pieces.push_back(render_span(script, span)); },
      [&](const ErrorSpan& span) { pieces.push_back(render_span(script, span)); },
      [&](const Token& tok) { pieces.push_back(tok.surface); });
  return join(pieces);
}

Script build_corrected_script(const Script& script, std::vector<std::string>* warnings) {
  Script out;
  out.id = script.id;
  out.gold_score = script.gold_score;
  out.score_range = script.score_range;
  auto emit = [&](const std::string& surface) { out.tokens.push_back(Token{surface, false, std::nullopt, std::nullopt}); };
  walk_script(
      script,
      [&](const ErrorSpan& span) {
        for (const auto& w : *span.correction) emit(w);
      },
      [&](const ErrorSpan& span) {
        if (span.correction) {
          for (const auto& w : *span.correction) emit(w);
          return;
        }
        for (std::size_t i = span.begin; i < span.end; ++i) emit(script.tokens[i].surface);
        if (warnings) {
          warnings->push_back(script.id + ": error at token " + std::to_string(span.begin) +
                              " has no correction; kept as-is");
        }
      },
      [&](const Token& tok) { emit(tok.surface); });
  return out;
}

double ngram_gold_score(std::span<const Token> window) {
  std::size_t flagged = 0;
  for (const auto& t : window) flagged += t.is_error ? 1 : 0;
  return 1.0 / (1.0 + static_cast<double>(flagged));
}

bool is_separator(const Token& token) { return token.surface == kAnswerEnd; }

std::vector<NgramInstance> extract_ngrams(const Script& script, std::size_t n) {
  if (n == 0) throw ParameterError("ngram size must be at least 1");
  std::vector<NgramInstance> out;
  const auto& toks = script.tokens;
  if (toks.size() < n) return out;
  for (std::size_t start = 0; start + n <= toks.size(); ++start) {
    std::span<const Token> window(toks.data() + start, n);
    if (std::any_of(window.begin(), window.end(), is_separator)) continue;
    out.push_back({script.id, start, n, ngram_gold_score(window)});
  }
  return out;
}

CorpusStats compute_stats(std::span<const Script> corpus) {
  if (corpus.empty()) throw ParameterError("cannot compute statistics of an empty corpus");
  CorpusStats stats;
  stats.script_count = corpus.size();
  std::size_t flagged_total = 0;
  std::vector<double> ratios;
  std::vector<double> scores;
  for (const auto& script : corpus) {
    std::size_t words = 0;
    std::size_t flagged = 0;
    for (const auto& tok : script.tokens) {
      if (is_separator(tok)) continue;
      ++words;
      flagged += tok.is_error ? 1 : 0;
    }
    stats.token_count += words;
    flagged_total += flagged;
    ratios.push_back(words == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(words));
    scores.push_back(script.gold_score);
  }
  stats.error_token_ratio = stats.token_count == 0
                                ? 0.0
                                : static_cast<double>(flagged_total) /
                                      static_cast<double>(stats.token_count);
  try {
    stats.score_error_spearman = spearman(ratios, scores);
  } catch (const UndefinedMetricError&) {
    stats.score_error_spearman.reset();
  }
  return stats;
}

std::string join_answers(std::span<const std::string> answers) {
  std::string out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (i > 0) out += " " + std::string(kAnswerEnd) + " ";
    out += answers[i];
  }
  return out;
}

nlohmann::json script_to_json(const Script& script) {
  return {{"id", script.id},
          {"score", script.gold_score},
          {"score_min", script.score_range.min},
          {"score_max", script.score_range.max},
          {"text", render_annotated(script)}};
}

Script script_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("corpus record is not an object");
  for (const char* key : {"id", "score", "score_min", "score_max", "text"}) {
    if (!j.contains(key)) throw FormatError(std::string("corpus record lacks \"") + key + "\"");
  }
  if (!j["id"].is_string() || !j["text"].is_string() || !j["score"].is_number() ||
      !j["score_min"].is_number() || !j["score_max"].is_number()) {
    throw FormatError("corpus record has a field of the wrong type");
  }
  return parse_annotated_script(j["text"].get<std::string>(), j["id"].get<std::string>(),
                                j["score"].get<double>(),
                                {j["score_min"].get<double>(), j["score_max"].get<double>()});
}

std::vector<Script> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  std::vector<Script> corpus;
  std::string line;
  std::size_t line_no = 0;
  const std::string where = path.string() + ":";
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + " invalid JSON: " + e.what(), line_no);
    }
    try {
      corpus.push_back(script_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(where + std::to_string(line_no) + ": " + e.what(), e.offset());
    } catch (const ParameterError& e) {
      throw FormatError(where + " " + e.what(), line_no);
    } catch (const FormatError& e) {
      throw FormatError(where + " " + e.what(), line_no);
    }
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& path, std::span<const Script> corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus " + path.string());
  for (const auto& script : corpus) out << script_to_json(script).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json stats_to_json(const CorpusStats& stats) {
  nlohmann::json j = {{"script_count", stats.script_count},
                      {"token_count", stats.token_count},
                      {"error_token_ratio", stats.error_token_ratio}};
  j["score_error_spearman"] =
      stats.score_error_spearman ? nlohmann::json(*stats.score_error_spearman) : nlohmann::json();
  return j;
}

}  // namespace lexembed
