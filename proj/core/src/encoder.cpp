#include "fedkgc/encoder.hpp"

#include <cmath>

#include "fedkgc/errors.hpp"
#include "fedkgc/rng.hpp"

namespace fedkgc {
namespace {

constexpr std::string_view kFwdSuffix = "#fwd";
constexpr std::string_view kInvSuffix = "#inv";
constexpr std::string_view kPrefixNs = "rel_prefix/";

const Tensor& require_param(const ModelWeights& w, std::string_view name) {
  auto it = w.find(name);
  if (it == w.end()) throw TrainError("missing parameter '" + std::string(name) + "'");
  return it->second;
}

void check_row(const Tensor& t, std::string_view name, std::uint32_t row) {
  if (static_cast<int>(row) >= t.rows) {
    throw TrainError("row " + std::to_string(row) + " out of range for '" + std::string(name) +
                     "' with " + std::to_string(t.rows) + " rows");
  }
}

EncodeTrace pool_and_normalize(const ModelWeights& w, EncodeTrace tr, std::string_view what) {
  const Tensor* rel = tr.rel_param.empty() ? nullptr : &require_param(w, tr.rel_param);
  const Tensor& tok = require_param(w, "tok_emb");
  int d = tok.cols;
  if (rel && rel->cols != d) {
    throw TrainError("dim mismatch between tok_emb and '" + tr.rel_param + "'");
  }
  std::size_t count = tr.rel_rows.size() + tr.entity_rows.size();
  if (count == 0) throw DataError(std::string(what) + " yields no tokens");

  std::vector<double> v(static_cast<std::size_t>(d), 0.0);
  if (rel) {
    for (std::uint32_t r : tr.rel_rows) {
      check_row(*rel, tr.rel_param, r);
      auto row = rel->row(static_cast<int>(r));
      for (int j = 0; j < d; ++j) v[j] += row[j];
    }
  }
  for (std::uint32_t r : tr.entity_rows) {
    check_row(tok, "tok_emb", r);
    auto row = tok.row(static_cast<int>(r));
    for (int j = 0; j < d; ++j) v[j] += row[j];
  }
  tr.inv_count = 1.0 / static_cast<double>(count);
  double sq = 0.0;
  for (int j = 0; j < d; ++j) {
    v[j] *= tr.inv_count;
    sq += v[j] * v[j];
  }
  tr.norm = std::sqrt(sq);
  if (tr.norm == 0.0) {
    throw TrainError("zero-norm pooled vector for " + std::string(what));
  }
  tr.e.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) tr.e[j] = v[j] / tr.norm;
  return tr;
}

}  // namespace

void validate_encoder_config(const EncoderConfig& cfg) {
  if (cfg.dim < 2) throw ConfigError("encoder: dim must be >= 2");
  if (cfg.rel_prefix_len < 1) throw ConfigError("encoder: rel_prefix_len must be >= 1");
  if (cfg.tokenizer.buckets < 1) throw ConfigError("encoder: bucket count must be >= 1");
  if (cfg.tokenizer.mode == TokenizerMode::hashed &&
      (cfg.tokenizer.buckets & (cfg.tokenizer.buckets - 1)) != 0) {
    throw ConfigError("encoder: hashed tokenizer needs a power-of-two bucket count");
  }
}

std::string make_relation_key(std::string_view relation_text, Direction dir) {
  std::string key(relation_text);
  key += (dir == Direction::forward) ? kFwdSuffix : kInvSuffix;
  return key;
}

RelationKeyParts parse_relation_key(std::string_view relation_key) {
  if (relation_key.size() >= kFwdSuffix.size()) {
    auto suffix = relation_key.substr(relation_key.size() - kFwdSuffix.size());
    auto text = relation_key.substr(0, relation_key.size() - kFwdSuffix.size());
    if (suffix == kFwdSuffix) return {text, Direction::forward};
    if (suffix == kInvSuffix) return {text, Direction::inverse};
  }
  throw ConfigError("relation key '" + std::string(relation_key) +
                    "' lacks a #fwd or #inv suffix");
}

std::string relation_param_name(std::string_view relation_key) {
  return std::string(kPrefixNs) + std::string(relation_key);
}

Embedding encode_entity(const ModelWeights& w, const Tokenizer& tk, std::string_view text) {
  return encode_entity_traced(w, tk, text).e;
}

EncodeTrace encode_entity_traced(const ModelWeights& w, const Tokenizer& tk,
                                 std::string_view text) {
  EncodeTrace tr;
  tr.entity_rows = tk.tokenize(text);
  return pool_and_normalize(w, std::move(tr), "entity text '" + std::string(text) + "'");
}

Embedding encode_relation_aware(const ModelWeights& w, const Tokenizer& tk,
                                const EncoderConfig& cfg, std::string_view entity_text,
                                std::string_view relation_key) {
  return encode_relation_aware_traced(w, tk, cfg, entity_text, relation_key).e;
}

EncodeTrace encode_relation_aware_traced(const ModelWeights& w, const Tokenizer& tk,
                                         const EncoderConfig& cfg, std::string_view entity_text,
                                         std::string_view relation_key) {
  EncodeTrace tr;
  auto parts = parse_relation_key(relation_key);
  if (cfg.relation_mode == RelationMode::parameterized) {
    tr.rel_param = relation_param_name(relation_key);
    const Tensor& prefix = require_param(w, tr.rel_param);
    tr.rel_rows.resize(static_cast<std::size_t>(prefix.rows));
    for (int r = 0; r < prefix.rows; ++r) tr.rel_rows[r] = static_cast<std::uint32_t>(r);
  } else {
    tr.rel_param = "tok_emb";
    tr.rel_rows = tk.tokenize_all(parts.text);
    if (tr.rel_rows.empty()) {
      throw DataError("relation text '" + std::string(parts.text) + "' yields no tokens");
    }
    if (parts.dir == Direction::inverse) {
      auto inv = tk.tokenize_all(kInvSuffix);
      tr.rel_rows.insert(tr.rel_rows.end(), inv.begin(), inv.end());
    }
  }
  tr.entity_rows = tk.tokenize(entity_text);
  if (tr.entity_rows.empty()) {
    throw DataError("entity text '" + std::string(entity_text) + "' yields no tokens");
  }
  return pool_and_normalize(w, std::move(tr),
                            "query (" + std::string(entity_text) + ", " +
                                std::string(relation_key) + ")");
}

ModelWeights init_weights(const EncoderConfig& cfg, const std::vector<std::string>& relation_texts,
                          std::uint64_t seed) {
  validate_encoder_config(cfg);
  if (relation_texts.empty()) throw ConfigError("init_weights: no relation texts");

  auto fill = [&](const std::string& name, int rows) {
    Tensor t(rows, cfg.dim);
    CounterRng rng(derive_key(seed, name));
    double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
    for (double& x : t.data) x = (rng.next_double() - 0.5) * scale;
    return t;
  };

  ModelWeights w;
  w.emplace("tok_emb", fill("tok_emb", static_cast<int>(cfg.tokenizer.buckets)));
  if (cfg.relation_mode == RelationMode::parameterized) {
    for (const auto& text : relation_texts) {
      if (text.empty()) throw ConfigError("init_weights: empty relation text");
      for (Direction dir : {Direction::forward, Direction::inverse}) {
        std::string name = relation_param_name(make_relation_key(text, dir));
        if (!w.emplace(name, fill(name, cfg.rel_prefix_len)).second) {
          throw ConfigError("init_weights: duplicate relation text '" + text + "'");
        }
      }
    }
  }
  return w;
}

}  // namespace fedkgc
