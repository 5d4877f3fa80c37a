#pragma once
// Deterministic whitespace tokenizer.
//
// Hashed mode maps each token to FNV-1a 64-bit folded into [0, V) by
// bitmask; collisions are deterministic across runs and platforms, and
// all clients share the same token-id space without exchanging any
// vocabulary. Vocab mode uses an explicit token -> id map and drops
// unknown tokens.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fedkgc/errors.hpp"

namespace fedkgc {

enum class TokenizerMode { hashed, vocab };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::hashed;
  std::uint32_t buckets = 4096;  // V; power of two in hashed mode
  int max_entity_tokens = 12;    // L_e
  bool lowercase = true;
};

class Tokenizer {
 public:
  explicit Tokenizer(TokenizerConfig cfg);
  Tokenizer(TokenizerConfig cfg, std::unordered_map<std::string, std::uint32_t> vocab);

  // Token-id sequence for `text`, truncated to the first max_entity_tokens
  // whitespace tokens. Empty text yields an empty sequence.
  std::vector<std::uint32_t> tokenize(std::string_view text) const;

  // Untruncated variant, used for relation surface texts.
  std::vector<std::uint32_t> tokenize_all(std::string_view text) const;

  const TokenizerConfig& config() const { return cfg_; }
  std::uint32_t buckets() const { return cfg_.buckets; }

 private:
  std::vector<std::uint32_t> run(std::string_view text, std::size_t max_tokens) const;

  TokenizerConfig cfg_;
  std::unordered_map<std::string, std::uint32_t> vocab_;
};

// Vocabulary over whitespace tokens of `texts`, ids assigned in first-seen
// order. Throws ConfigError if the vocabulary exceeds cfg.buckets.
std::unordered_map<std::string, std::uint32_t> build_vocab(
    const std::vector<std::string>& texts, const TokenizerConfig& cfg);

}  // namespace fedkgc
