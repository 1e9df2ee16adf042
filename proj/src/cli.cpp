#include "lexembed/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lexembed/aa_model.hpp"
#include "lexembed/checkpoint.hpp"
#include "lexembed/corpus.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/errors.hpp"
#include "lexembed/metrics.hpp"
#include "lexembed/pretrain.hpp"
#include "seeds.hpp"

namespace lexembed::cli {

using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("lexembed");
    const char* env = std::getenv("LEXEMBED_LOG");
    const std::string level = env ? env : "info";
    if (level == "error") {
      l->set_level(spdlog::level::err);
    } else if (level == "debug") {
      l->set_level(spdlog::level::debug);
    } else {
      l->set_level(spdlog::level::info);
    }
    return l;
  }();
  return log;
}

struct Preset {
  std::size_t error_filter;
  std::size_t script_filter;
  double aa_lr;
};

Preset lookup_preset(const std::string& name) {
  if (name == "fce-small") return {3, 3, 0.001};
  if (name == "fce-large") return {9, 9, 0.0001};
  throw ParameterError("unknown preset '" + name + "'");
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const json& config, const std::string& header) : out_(path), path_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
    out_ << "# config: " << config.dump() << '\n' << header << '\n';
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
    out_ << '\n';
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

// --- gen-synthetic ---------------------------------------------------------

struct GenArgs {
  std::string out;
  std::string stats;
  std::string dev_out;
  std::size_t dev_scripts = 0;
  SyntheticParams params;
};

json to_json(const GenArgs& a) {
  const auto& p = a.params;
  return {{"command", "gen-synthetic"}, {"out", a.out},          {"stats", a.stats},
          {"dev_out", a.dev_out},       {"dev_scripts", a.dev_scripts},
          {"vocab_size", p.vocab_size}, {"scripts", p.script_count}, {"mean_len", p.mean_len},
          {"error_rate_lo", p.error_rate_lo}, {"error_rate_hi", p.error_rate_hi}, {"seed", p.seed},
          {"score_min", p.score_range.min}, {"score_max", p.score_range.max}};
}

int cmd_gen_synthetic(GenArgs a, std::ostream& out) {
  if (a.stats.empty()) a.stats = a.out + ".stats.json";
  if (a.dev_scripts > 0 && a.dev_out.empty()) throw ParameterError("--dev-scripts needs --dev-out");
  SyntheticParams p = a.params;
  p.script_count += a.dev_scripts;
  const auto corpus = generate_synthetic_corpus(p);
  const std::span<const Script> all(corpus);
  const auto train = all.first(a.params.script_count);
  write_corpus(a.out, train);
  if (a.dev_scripts > 0) write_corpus(a.dev_out, all.subspan(a.params.script_count));

  const auto stats = compute_stats(train);
  json report = stats_to_json(stats);
  report["config"] = to_json(a);
  write_json(a.stats, report);
  out << "score_error_spearman "
      << (stats.score_error_spearman ? fmt_double(*stats.score_error_spearman) : std::string("undefined")) << '\n';
  logger()->info("wrote {} scripts to {}", train.size(), a.out);
  return kOk;
}

// --- pretrain --------------------------------------------------------------

struct PretrainArgs {
  std::string corpus;
  std::string method;
  std::string out;
  std::string loss_csv;
  std::string init_vectors;
  std::string preset;
  std::size_t dim = 50;
  double embed_scale = 0.1;
  std::size_t min_count = 1;
  PretrainConfig config;
};

json to_json(const PretrainArgs& a) {
  const auto& c = a.config;
  return {{"command", "pretrain"}, {"corpus", a.corpus}, {"method", a.method},
          {"out", a.out},          {"loss_csv", a.loss_csv}, {"init_vectors", a.init_vectors},
          {"preset", a.preset},    {"dim", a.dim},       {"embed_scale", a.embed_scale},
          {"min_count", a.min_count}, {"n", c.n},        {"epochs", c.epochs},
          {"lr", c.lr},            {"batch", c.batch_size}, {"seed", c.seed},
          {"init_scale", c.init_scale}, {"alpha", c.alpha}, {"k_noisy", c.k_noisy},
          {"hidden", c.hidden}};
}

EmbeddingMatrix initial_embeddings(const std::string& vectors, const Vocabulary& vocab, std::size_t dim,
                                   double scale, std::uint64_t seed) {
  const auto emb_seed = derive_seed(seed, SeedStream::kEmbeddings);
  if (vectors.empty()) return init_random(vocab, dim, scale, emb_seed);
  auto loaded = load_text_vectors(vectors, vocab, scale, emb_seed);
  logger()->info("loaded vectors from {}: {} words covered, {} missing", vectors, loaded.hits, loaded.misses);
  return std::move(loaded.embeddings);
}

int cmd_pretrain(PretrainArgs a, std::ostream& out) {
  a.config.method = parse_method(a.method);
  if (a.loss_csv.empty()) a.loss_csv = a.out + ".loss.csv";
  a.config.validate();
  const auto corpus = read_corpus(a.corpus);
  const auto vocab = build_vocab(corpus, a.min_count);
  auto emb = initial_embeddings(a.init_vectors, vocab, a.dim, a.embed_scale, a.config.seed);
  a.dim = emb.dim();
  const json config = to_json(a);

  CsvWriter csv(a.loss_csv, config, "epoch,mean_loss");
  auto on_epoch = [&](int epoch, double loss) {
    logger()->info("{} epoch {}: mean loss {:.6f}", a.method, epoch, loss);
    csv.row({std::to_string(epoch), fmt_double(loss)});
  };

  Checkpoint ckpt;
  double final_loss = 0.0;
  switch (a.config.method) {
    case PretrainMethod::kEswe:
    case PretrainMethod::kEcswe: {
      auto res = a.config.method == PretrainMethod::kEswe ? train_eswe(corpus, std::move(emb), a.config, on_epoch)
                                                          : train_ecswe(corpus, std::move(emb), a.config, on_epoch);
      final_loss = res.epoch_losses.back();
      ckpt = make_checkpoint(res.model, res.embeddings, a.config.method, config);
      break;
    }
    case PretrainMethod::kSswe: {
      auto res = train_sswe(corpus, std::move(emb), a.config, on_epoch);
      final_loss = res.epoch_losses.back();
      ckpt = make_checkpoint(res.model, res.embeddings, config);
      break;
    }
  }
  save_checkpoint(ckpt, a.out);
  out << "final_mean_loss " << fmt_double(final_loss) << '\n';
  return kOk;
}

// --- train-aa --------------------------------------------------------------

struct TrainAaArgs {
  std::string train;
  std::string dev;
  std::string embeddings;
  std::string out;
  std::string history_csv;
  std::string preset;
  std::size_t dim = 50;
  double embed_scale = 0.1;
  std::size_t min_count = 1;
  AaModelConfig model;
  AaTrainConfig train_config;
};

json to_json(const TrainAaArgs& a) {
  return {{"command", "train-aa"},   {"train", a.train},
          {"dev", a.dev},            {"embeddings", a.embeddings},
          {"out", a.out},            {"history_csv", a.history_csv},
          {"preset", a.preset},      {"dim", a.dim},
          {"embed_scale", a.embed_scale}, {"min_count", a.min_count},
          {"m", a.model.m},          {"h", a.model.h},
          {"freeze_embeddings", a.model.frozen_embeddings}, {"init_scale", a.model.init_scale},
          {"epochs", a.train_config.epochs}, {"lr", a.train_config.lr},
          {"l2", a.train_config.l2}, {"batch", a.train_config.batch_size},
          {"seed", a.train_config.seed}};
}

int cmd_train_aa(TrainAaArgs a, std::ostream& out) {
  if (a.history_csv.empty()) a.history_csv = a.out + ".history.csv";
  a.model.seed = a.train_config.seed;
  const auto train = read_corpus(a.train);
  const auto dev = read_corpus(a.dev);

  EmbeddingMatrix emb;
  if (a.embeddings == "random") {
    emb = initial_embeddings("", build_vocab(train, a.min_count), a.dim, a.embed_scale, a.train_config.seed);
  } else if (is_checkpoint_file(a.embeddings)) {
    auto ckpt = load_checkpoint(a.embeddings);
    logger()->info("bootstrapping from {} checkpoint {}", ckpt.kind, a.embeddings);
    emb = std::move(ckpt.embeddings);
  } else {
    emb = initial_embeddings(a.embeddings, build_vocab(train, a.min_count), a.dim, a.embed_scale,
                             a.train_config.seed);
  }
  a.dim = emb.dim();
  const json config = to_json(a);

  CsvWriter csv(a.history_csv, config, "epoch,train_mse,dev_mse");
  auto on_epoch = [&](const AaEpochRecord& r) {
    logger()->info("aa epoch {}: train mse {:.6f}, dev mse {:.6f}", r.epoch, r.train_mse, r.dev_mse);
    csv.row({std::to_string(r.epoch), fmt_double(r.train_mse), fmt_double(r.dev_mse)});
  };
  const auto res = train_aa(train, dev, std::move(emb), a.model, a.train_config, on_epoch);

  json ckpt_config = config;
  ckpt_config["best_epoch"] = res.best_epoch;
  ckpt_config["best_dev_mse"] = res.best_dev_mse;
  save_checkpoint(make_checkpoint(res.model, res.embeddings, ckpt_config), a.out);
  out << "best_epoch " << res.best_epoch << "\nbest_dev_mse " << fmt_double(res.best_dev_mse) << '\n';
  return kOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string test;
  std::string out;
  std::string predictions_out;
  std::string predictions_in;
};

json to_json(const EvaluateArgs& a) {
  return {{"command", "evaluate"}, {"model", a.model}, {"test", a.test}, {"out", a.out},
          {"predictions_out", a.predictions_out}, {"predictions_in", a.predictions_in}};
}

struct Prediction {
  std::string id;
  double gold;
  double pred;
};

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions " + path.string());
  std::vector<Prediction> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "id,gold,pred") throw FormatError(path.string() + ": expected header id,gold,pred", line_no);
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw FormatError(path.string() + ": expected three fields", line_no);
    }
    try {
      std::size_t used = 0;
      const std::string gold = line.substr(c1 + 1, c2 - c1 - 1);
      const std::string pred = line.substr(c2 + 1);
      const double g = std::stod(gold, &used);
      if (used != gold.size()) throw std::invalid_argument(gold);
      const double p = std::stod(pred, &used);
      if (used != pred.size()) throw std::invalid_argument(pred);
      rows.push_back({line.substr(0, c1), g, p});
    } catch (const std::logic_error&) {
      throw FormatError(path.string() + ": unparsable number", line_no);
    }
  }
  return rows;
}

std::vector<Prediction> predict_corpus(const std::string& model_path, const std::string& test_path) {
  const auto ckpt = load_checkpoint(model_path);
  const auto model = aa_from_checkpoint(ckpt);
  const auto test = read_corpus(test_path);
  std::size_t known = 0;
  std::size_t total = 0;
  for (const auto& s : test) {
    for (const auto& t : s.tokens) {
      ++total;
      known += ckpt.embeddings.vocab.contains(t.surface) ? 1 : 0;
    }
  }
  if (known == 0) throw CompatibilityError("no test token is in the checkpoint vocabulary");
  logger()->debug("test vocabulary coverage {}/{}", known, total);
  std::vector<Prediction> rows;
  for (const auto& s : test) rows.push_back({s.id, s.gold_score, predict(model, ckpt.embeddings, s)});
  return rows;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.predictions_in.empty() == (a.model.empty() || a.test.empty())) {
    if (a.predictions_in.empty()) throw ParameterError("evaluate needs --model and --test, or --predictions-in");
    throw ParameterError("--predictions-in cannot be combined with --model/--test");
  }
  const auto rows = a.predictions_in.empty() ? predict_corpus(a.model, a.test) : read_predictions(a.predictions_in);
  const json config = to_json(a);
  if (!a.predictions_out.empty()) {
    CsvWriter csv(a.predictions_out, config, "id,gold,pred");
    for (const auto& r : rows) csv.row({r.id, fmt_double(r.gold), fmt_double(r.pred)});
  }
  std::vector<double> pred;
  std::vector<double> gold;
  for (const auto& r : rows) {
    pred.push_back(r.pred);
    gold.push_back(r.gold);
  }
  json report = {{"rmse", rmse(pred, gold)}, {"n", rows.size()}};
  std::optional<std::string> undefined;
  try {
    report["pearson"] = pearson(pred, gold);
    report["spearman"] = spearman(pred, gold);
  } catch (const UndefinedMetricError& e) {
    report["pearson"] = nullptr;
    report["spearman"] = nullptr;
    undefined = e.what();
  }
  report["config"] = config;
  if (a.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    write_json(a.out, report);
    out << "pearson " << report["pearson"].dump() << "\nspearman " << report["spearman"].dump() << "\nrmse "
        << report["rmse"].dump() << '\n';
  }
  if (undefined) {
    err << "error: " << *undefined << '\n';
    return kNumeric;
  }
  return kOk;
}

// --- analyze-ap ------------------------------------------------------------

struct AnalyzeArgs {
  std::string model;
  std::string corpus;
  std::string out;
  std::size_t n = 0;
  std::size_t shuffles = 100;
  double alpha = 0.1;
  std::uint64_t seed = 1;
};

json to_json(const AnalyzeArgs& a) {
  return {{"command", "analyze-ap"}, {"model", a.model}, {"corpus", a.corpus}, {"out", a.out}, {"n", a.n},
          {"shuffles", a.shuffles},  {"alpha", a.alpha}, {"seed", a.seed}};
}

int cmd_analyze_ap(AnalyzeArgs a, std::ostream& out) {
  const auto ckpt = load_checkpoint(a.model);
  const auto corpus = read_corpus(a.corpus);
  const auto& emb = ckpt.embeddings;
  const bool is_sswe = ckpt.kind == "sswe";
  std::optional<EsweModel> eswe;
  std::optional<SsweModel> sswe;
  std::size_t model_n = 0;
  if (is_sswe) {
    sswe = sswe_from_checkpoint(ckpt);
    model_n = sswe->n;
  } else {
    eswe = eswe_from_checkpoint(ckpt);
    model_n = eswe->n;
  }
  if (a.n != 0 && a.n != model_n) {
    throw CompatibilityError("--n " + std::to_string(a.n) + " differs from the checkpoint's ngram size " +
                             std::to_string(model_n));
  }
  a.n = model_n;

  std::vector<int> labels;
  std::vector<std::vector<std::size_t>> ngrams;
  for (const auto& script : corpus) {
    for (const auto& ng : extract_ngrams(script, a.n)) {
      labels.push_back(ng.gold_error_score < 1.0 ? 1 : 0);
      ngrams.push_back(ngram_ids(script, ng, emb.vocab));
    }
  }
  std::vector<double> scores;
  if (is_sswe) {
    scores = sswe_errorness(*sswe, emb, ngrams, a.alpha);
  } else {
    for (const auto& ids : ngrams) scores.push_back(eswe_errorness(*eswe, emb, ids));
  }
  const auto report = average_precision(labels, scores);
  const double baseline = random_baseline_ap(labels, a.shuffles, derive_seed(a.seed, SeedStream::kBaseline));

  json j = lexembed::to_json(report);
  j["random_baseline_ap"] = baseline;
  j["method"] = ckpt.kind;
  j["config"] = to_json(a);
  if (a.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json(a.out, j);
    out << "ap " << fmt_double(report.ap) << "\nrandom_baseline_ap " << fmt_double(baseline) << '\n';
  }
  return kOk;
}

// Inserts key=value pairs from --config files for options not given on the
// command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  if (args.empty()) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::optional<std::string> config_path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string name = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) {
        config_path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        config_path = args[i + 1];
      }
    }
  }
  if (!config_path) return args;
  std::vector<std::string> expanded = args;
  for (const auto& [key, value] : read_config_file(*config_path)) {
    if (given.contains(key)) continue;
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (opt != nullptr && opt->get_expected_max() == 0) {
      if (value == "true" || value == "1" || value == "yes") expanded.push_back("--" + key);
      continue;
    }
    expanded.push_back("--" + key);
    expanded.push_back(value);
  }
  return expanded;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(path.string() + ": expected key=value", line_no);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw FormatError(path.string() + ": empty key", line_no);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const CompatibilityError*>(&e)) return kUsage;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const UndefinedMetricError*>(&e)) return kNumeric;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const InputError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const IndexError*>(&e)) {
    return kIo;
  }
  return kFailure;
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error-oriented word embeddings and holistic script scoring", "lexembed"};
  app.require_subcommand(1);
  std::string config_file;

  GenArgs gen;
  auto* g = app.add_subcommand("gen-synthetic", "Generate a seeded synthetic annotated corpus");
  g->add_option("--out", gen.out, "Corpus output (JSON lines)")->required();
  g->add_option("--stats", gen.stats, "Corpus statistics JSON (default <out>.stats.json)");
  g->add_option("--dev-out", gen.dev_out, "Second corpus drawn from the same language");
  g->add_option("--dev-scripts", gen.dev_scripts, "Scripts written to --dev-out");
  g->add_option("--vocab-size", gen.params.vocab_size)->capture_default_str();
  g->add_option("--scripts", gen.params.script_count)->capture_default_str();
  g->add_option("--mean-len", gen.params.mean_len)->capture_default_str();
  g->add_option("--error-rate-lo", gen.params.error_rate_lo)->capture_default_str();
  g->add_option("--error-rate-hi", gen.params.error_rate_hi)->capture_default_str();
  g->add_option("--score-min", gen.params.score_range.min)->capture_default_str();
  g->add_option("--score-max", gen.params.score_range.max)->capture_default_str();
  g->add_option("--seed", gen.params.seed)->capture_default_str();
  g->add_option("--config", config_file, "key=value defaults");

  PretrainArgs pre;
  auto* p = app.add_subcommand("pretrain", "Pre-train ESWE, ECSWE or SSWE embeddings");
  p->add_option("--corpus", pre.corpus)->required()->check(CLI::ExistingFile);
  p->add_option("--method", pre.method)->required()->check(CLI::IsMember({"eswe", "ecswe", "sswe"}));
  p->add_option("--out", pre.out, "Checkpoint path")->required();
  p->add_option("--loss-csv", pre.loss_csv, "Per-epoch loss (default <out>.loss.csv)");
  p->add_option("--init-vectors", pre.init_vectors, "GloVe-style text vectors")->check(CLI::ExistingFile);
  auto* pre_preset = p->add_option("--preset", pre.preset)->check(CLI::IsMember({"fce-small", "fce-large"}));
  p->add_option("--dim", pre.dim)->capture_default_str();
  p->add_option("--embed-scale", pre.embed_scale, "Uniform range of random embedding rows")->capture_default_str();
  p->add_option("--min-count", pre.min_count)->capture_default_str();
  auto* pre_n = p->add_option("--n", pre.config.n, "Ngram size (error filter)")->capture_default_str();
  p->add_option("--epochs", pre.config.epochs)->capture_default_str();
  p->add_option("--lr", pre.config.lr)->capture_default_str();
  p->add_option("--batch", pre.config.batch_size)->capture_default_str();
  p->add_option("--seed", pre.config.seed)->capture_default_str();
  p->add_option("--init-scale", pre.config.init_scale)->capture_default_str();
  p->add_option("--alpha", pre.config.alpha)->capture_default_str();
  p->add_option("--k-noisy", pre.config.k_noisy)->capture_default_str();
  p->add_option("--hidden", pre.config.hidden)->capture_default_str();
  p->add_option("--config", config_file, "key=value defaults");

  TrainAaArgs aa;
  auto* t = app.add_subcommand("train-aa", "Train the holistic scoring network");
  t->set_help_flag("--help", "Print this help message and exit");
  t->add_option("--train", aa.train)->required()->check(CLI::ExistingFile);
  t->add_option("--dev", aa.dev)->required()->check(CLI::ExistingFile);
  t->add_option("--embeddings", aa.embeddings, "Checkpoint, text vectors, or 'random'")->required();
  t->add_option("--out", aa.out, "Checkpoint path")->required();
  t->add_option("--history-csv", aa.history_csv, "Per-epoch MSE (default <out>.history.csv)");
  auto* aa_preset = t->add_option("--preset", aa.preset)->check(CLI::IsMember({"fce-small", "fce-large"}));
  t->add_option("--dim", aa.dim, "Dimension of random embeddings")->capture_default_str();
  t->add_option("--embed-scale", aa.embed_scale)->capture_default_str();
  t->add_option("--min-count", aa.min_count)->capture_default_str();
  auto* aa_m = t->add_option("--m", aa.model.m, "Script filter window")->capture_default_str();
  t->add_option("--h", aa.model.h, "Feature maps")->capture_default_str();
  t->add_flag("--freeze-embeddings", aa.model.frozen_embeddings);
  t->add_option("--init-scale", aa.model.init_scale)->capture_default_str();
  t->add_option("--epochs", aa.train_config.epochs)->capture_default_str();
  auto* aa_lr = t->add_option("--lr", aa.train_config.lr)->capture_default_str();
  t->add_option("--l2", aa.train_config.l2)->capture_default_str();
  t->add_option("--batch", aa.train_config.batch_size)->capture_default_str();
  t->add_option("--seed", aa.train_config.seed)->capture_default_str();
  t->add_option("--config", config_file, "key=value defaults");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a test corpus with an AA checkpoint");
  e->add_option("--model", ev.model)->check(CLI::ExistingFile);
  e->add_option("--test", ev.test)->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "Report JSON (default: stdout)");
  e->add_option("--predictions-out", ev.predictions_out, "Per-script predictions CSV");
  e->add_option("--predictions-in", ev.predictions_in, "Re-score a predictions CSV")->check(CLI::ExistingFile);
  e->add_option("--config", config_file, "key=value defaults");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze-ap", "Average precision of ngram error detection");
  a->add_option("--model", an.model, "ESWE, ECSWE or SSWE checkpoint")->required()->check(CLI::ExistingFile);
  a->add_option("--corpus", an.corpus)->required()->check(CLI::ExistingFile);
  a->add_option("--out", an.out, "Report JSON (default: stdout)");
  a->add_option("--n", an.n, "Ngram size (default: the checkpoint's)");
  a->add_option("--shuffles", an.shuffles)->capture_default_str();
  a->add_option("--alpha", an.alpha, "SSWE score combination weight")->capture_default_str();
  a->add_option("--seed", an.seed)->capture_default_str();
  a->add_option("--config", config_file, "key=value defaults");

  try {
    args = expand_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  }

  try {
    if (g->parsed()) return cmd_gen_synthetic(gen, out);
    if (p->parsed()) {
      if (!pre.preset.empty() && pre_n->count() == 0) pre.config.n = lookup_preset(pre.preset).error_filter;
      (void)pre_preset;
      return cmd_pretrain(pre, out);
    }
    if (t->parsed()) {
      if (!aa.preset.empty()) {
        const auto preset = lookup_preset(aa.preset);
        if (aa_m->count() == 0) aa.model.m = preset.script_filter;
        if (aa_lr->count() == 0) aa.train_config.lr = preset.aa_lr;
      }
      (void)aa_preset;
      return cmd_train_aa(aa, out);
    }
    if (e->parsed()) return cmd_evaluate(ev, out, err);
    if (a->parsed()) return cmd_analyze_ap(an, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), std::cout, std::cerr);
}

}  // namespace lexembed::cli
