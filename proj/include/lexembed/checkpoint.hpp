#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "lexembed/aa_model.hpp"
#include "lexembed/embeddings.hpp"
#include "lexembed/numeric.hpp"
#include "lexembed/pretrain.hpp"

namespace lexembed {

inline constexpr std::string_view kCheckpointFormat = "lexembed-v1";

// Single JSON archive: format tag, model kind, resolved config, model
// hyperparameters, vocabulary, the embeddings as a GloVe-style text block and
// every parameter array with its shape.
struct Checkpoint {
  std::string kind;  // eswe | ecswe | sswe | aa
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json model = nlohmann::json::object();
  EmbeddingMatrix embeddings;
  ParamBundle params;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// True when the file parses as JSON carrying the lexembed-v1 tag.
bool is_checkpoint_file(const std::filesystem::path& path);

Checkpoint make_checkpoint(const EsweModel& model, const EmbeddingMatrix& emb, PretrainMethod method,
                           nlohmann::json config);
Checkpoint make_checkpoint(const SsweModel& model, const EmbeddingMatrix& emb, nlohmann::json config);
Checkpoint make_checkpoint(const AaModel& model, const EmbeddingMatrix& emb, nlohmann::json config);

// Throw CompatibilityError when the checkpoint holds a different kind of model.
EsweModel eswe_from_checkpoint(const Checkpoint& ckpt);
SsweModel sswe_from_checkpoint(const Checkpoint& ckpt);
AaModel aa_from_checkpoint(const Checkpoint& ckpt);

}  // namespace lexembed
