#include "lexembed/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "lexembed/errors.hpp"

namespace lexembed {

using nlohmann::json;

json checkpoint_to_json(const Checkpoint& ckpt) {
  json params = json::object();
  for (const auto& [name, m] : ckpt.params) {
    params[name] = {{"rows", m.rows()},
                    {"cols", m.cols()},
                    {"values", std::vector<double>(m.values().begin(), m.values().end())}};
  }
  return {{"format", kCheckpointFormat},
          {"kind", ckpt.kind},
          {"config", ckpt.config},
          {"model", ckpt.model},
          {"vocab", ckpt.embeddings.vocab.words()},
          {"embeddings", format_text_vectors(ckpt.embeddings)},
          {"params", std::move(params)}};
}

Checkpoint checkpoint_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
      throw FormatError("not a " + std::string(kCheckpointFormat) + " checkpoint");
    }
    Checkpoint ckpt;
    ckpt.kind = j.at("kind").get<std::string>();
    ckpt.config = j.at("config");
    ckpt.model = j.at("model");
    ckpt.embeddings = parse_text_vectors(j.at("embeddings").get<std::string>());
    if (j.at("vocab").get<std::vector<std::string>>() != ckpt.embeddings.vocab.words()) {
      throw FormatError("checkpoint vocabulary disagrees with its embedding block");
    }
    for (const auto& [name, p] : j.at("params").items()) {
      ckpt.params.emplace(name, DenseMatrix(p.at("rows").get<std::size_t>(), p.at("cols").get<std::size_t>(),
                                            p.at("values").get<std::vector<double>>()));
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(ckpt).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid checkpoint JSON: " + e.what());
  }
  try {
    return checkpoint_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

bool is_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return false;
  char first = 0;
  in >> first;
  if (first != '{') return false;
  in.seekg(0);
  const auto j = json::parse(in, nullptr, false);
  return j.is_object() && j.value("format", "") == kCheckpointFormat;
}

Checkpoint make_checkpoint(const EsweModel& model, const EmbeddingMatrix& emb, PretrainMethod method,
                           json config) {
  return {to_string(method), std::move(config), {{"n", model.n}}, emb, model.parameters()};
}

Checkpoint make_checkpoint(const SsweModel& model, const EmbeddingMatrix& emb, json config) {
  return {"sswe",
          std::move(config),
          {{"n", model.n}, {"alpha", model.alpha}, {"k_noisy", model.k_noisy}},
          emb,
          model.parameters()};
}

Checkpoint make_checkpoint(const AaModel& model, const EmbeddingMatrix& emb, json config) {
  return {"aa",
          std::move(config),
          {{"m", model.m}, {"h", model.feature_maps()}, {"frozen_embeddings", model.frozen_embeddings}},
          emb,
          model.parameters()};
}

namespace {

template <typename Fn>
auto rebuild(const char* what, Fn fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint lacks ") + what + " metadata: " + e.what());
  } catch (const std::out_of_range&) {
    throw FormatError(std::string("checkpoint lacks ") + what + " parameters");
  } catch (const DimensionError& e) {
    throw CompatibilityError(std::string(what) + " checkpoint is inconsistent: " + e.what());
  }
}

void check_width(std::size_t width, std::size_t window, const EmbeddingMatrix& emb, const char* what) {
  if (width != window * emb.dim()) {
    throw CompatibilityError(std::string(what) + " parameters expect dimension " + std::to_string(width / window) +
                             " but the embeddings have " + std::to_string(emb.dim()));
  }
}

}  // namespace

EsweModel eswe_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "eswe" && ckpt.kind != "ecswe") {
    throw CompatibilityError("expected an eswe/ecswe checkpoint, found '" + ckpt.kind + "'");
  }
  auto model = rebuild("ESWE", [&] {
    return EsweModel::from_parameters(ckpt.params, ckpt.model.at("n").get<std::size_t>());
  });
  check_width(model.filter.cols(), model.n, ckpt.embeddings, "ESWE");
  return model;
}

SsweModel sswe_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "sswe") throw CompatibilityError("expected an sswe checkpoint, found '" + ckpt.kind + "'");
  auto model = rebuild("SSWE", [&] {
    return SsweModel::from_parameters(ckpt.params, ckpt.model.at("n").get<std::size_t>(),
                                      ckpt.model.at("alpha").get<double>(),
                                      ckpt.model.at("k_noisy").get<std::size_t>());
  });
  check_width(model.hidden.cols(), model.n, ckpt.embeddings, "SSWE");
  return model;
}

AaModel aa_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "aa") throw CompatibilityError("expected an aa checkpoint, found '" + ckpt.kind + "'");
  auto model = rebuild("AA", [&] {
    return AaModel::from_parameters(ckpt.params, ckpt.model.at("m").get<std::size_t>(),
                                    ckpt.model.at("frozen_embeddings").get<bool>());
  });
  check_width(model.filter.cols(), model.m, ckpt.embeddings, "AA");
  return model;
}

}  // namespace lexembed
