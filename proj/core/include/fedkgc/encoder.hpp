#pragma once
// Bi-encoder over token embeddings: relation rows (trainable prefix tensor,
// or the relation's own token rows in textual mode) concatenated with entity
// token rows, mean-pooled and L2-normalized.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedkgc/tensor.hpp"
#include "fedkgc/tokenizer.hpp"

namespace fedkgc {

enum class RelationMode { parameterized, textual };
enum class Direction { forward, inverse };

struct EncoderConfig {
  int dim = 64;             // d
  int rel_prefix_len = 12;  // L_r, rows per relation prefix tensor
  RelationMode relation_mode = RelationMode::parameterized;
  TokenizerConfig tokenizer;
};

// Throws ConfigError unless dim >= 2, rel_prefix_len >= 1, buckets >= 1
// (and a power of two in hashed mode).
void validate_encoder_config(const EncoderConfig& cfg);

using Embedding = std::vector<double>;

// "<relation text>#fwd" or "<relation text>#inv".
std::string make_relation_key(std::string_view relation_text, Direction dir);

struct RelationKeyParts {
  std::string_view text;
  Direction dir;
};
// Splits a relation key back into surface text and direction; throws
// ConfigError when the suffix is missing.
RelationKeyParts parse_relation_key(std::string_view relation_key);

// Parameter name of a relation's prefix tensor: "rel_prefix/<relation_key>".
std::string relation_param_name(std::string_view relation_key);

// Pooled-row provenance of one embedding, kept for backpropagation: the
// gradient of the loss w.r.t. every pooled row is the normalization backprop
// of the embedding gradient divided by the pooled row count.
struct EncodeTrace {
  std::string rel_param;                   // "" when only entity tokens pooled
  std::vector<std::uint32_t> rel_rows;     // rows of rel_param, multiplicity kept
  std::vector<std::uint32_t> entity_rows;  // rows of tok_emb, multiplicity kept
  double inv_count = 0.0;                  // 1 / number of pooled rows
  double norm = 0.0;                       // L2 norm of the pooled mean
  Embedding e;                             // unit-norm embedding
};

// Mean of the entity text's token rows, L2-normalized. Throws DataError when
// the text yields no tokens, TrainError on a zero-norm pooled vector.
Embedding encode_entity(const ModelWeights& w, const Tokenizer& tk, std::string_view text);
EncodeTrace encode_entity_traced(const ModelWeights& w, const Tokenizer& tk,
                                 std::string_view text);

// Relation-aware query embedding. Parameterized mode pools the rows of
// rel_prefix/<relation_key> with the entity token rows; textual mode pools
// the relation text's token rows instead (inverse direction appends the
// literal "#inv" token). Throws TrainError when the relation parameter is
// missing, DataError when relation or entity text yields no tokens.
Embedding encode_relation_aware(const ModelWeights& w, const Tokenizer& tk,
                                const EncoderConfig& cfg, std::string_view entity_text,
                                std::string_view relation_key);
EncodeTrace encode_relation_aware_traced(const ModelWeights& w, const Tokenizer& tk,
                                         const EncoderConfig& cfg, std::string_view entity_text,
                                         std::string_view relation_key);

// Fresh weights: tok_emb [V, d] plus, in parameterized mode, a [L_r, d]
// prefix tensor per relation text and direction. Every tensor is filled
// i.i.d. uniform in [-0.5/sqrt(d), +0.5/sqrt(d)] from a counter RNG keyed by
// (seed, parameter name), so construction order never matters. Throws
// ConfigError on duplicate or empty relation texts.
ModelWeights init_weights(const EncoderConfig& cfg, const std::vector<std::string>& relation_texts,
                          std::uint64_t seed);

}  // namespace fedkgc
