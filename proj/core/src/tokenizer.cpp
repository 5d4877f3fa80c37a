#include "fedkgc/tokenizer.hpp"

#include <cctype>
#include <limits>

#include "fedkgc/rng.hpp"

namespace fedkgc {
namespace {

bool is_power_of_two(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string lowercased(std::string_view token) {
  std::string out(token);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

Tokenizer::Tokenizer(TokenizerConfig cfg) : cfg_(cfg) {
  if (cfg_.buckets < 1) throw ConfigError("tokenizer: bucket count must be >= 1");
  if (cfg_.mode == TokenizerMode::hashed && !is_power_of_two(cfg_.buckets)) {
    throw ConfigError("tokenizer: hashed mode requires a power-of-two bucket count");
  }
  if (cfg_.max_entity_tokens < 1) {
    throw ConfigError("tokenizer: max entity tokens must be >= 1");
  }
  if (cfg_.mode == TokenizerMode::vocab) {
    throw ConfigError("tokenizer: vocab mode requires an explicit vocabulary");
  }
}

Tokenizer::Tokenizer(TokenizerConfig cfg, std::unordered_map<std::string, std::uint32_t> vocab)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  if (cfg_.mode != TokenizerMode::vocab) {
    throw ConfigError("tokenizer: vocabulary given but mode is not vocab");
  }
  for (const auto& [tok, id] : vocab_) {
    if (id >= cfg_.buckets) {
      throw ConfigError("tokenizer: vocab id " + std::to_string(id) + " for '" + tok +
                        "' exceeds bucket count");
    }
  }
}

std::vector<std::uint32_t> Tokenizer::run(std::string_view text, std::size_t max_tokens) const {
  std::vector<std::uint32_t> ids;
  std::size_t i = 0;
  while (i < text.size() && ids.size() < max_tokens) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    std::string_view token = text.substr(start, i - start);
    std::string norm = cfg_.lowercase ? lowercased(token) : std::string(token);
    if (cfg_.mode == TokenizerMode::hashed) {
      ids.push_back(static_cast<std::uint32_t>(fnv1a64(norm) & (cfg_.buckets - 1)));
    } else {
      auto it = vocab_.find(norm);
      if (it != vocab_.end()) ids.push_back(it->second);
    }
  }
  return ids;
}

std::vector<std::uint32_t> Tokenizer::tokenize(std::string_view text) const {
  return run(text, static_cast<std::size_t>(cfg_.max_entity_tokens));
}

std::vector<std::uint32_t> Tokenizer::tokenize_all(std::string_view text) const {
  return run(text, std::numeric_limits<std::size_t>::max());
}

std::unordered_map<std::string, std::uint32_t> build_vocab(const std::vector<std::string>& texts,
                                                           const TokenizerConfig& cfg) {
  std::unordered_map<std::string, std::uint32_t> vocab;
  auto add = [&](std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i == start) break;
      std::string norm = cfg.lowercase ? lowercased(text.substr(start, i - start))
                                       : std::string(text.substr(start, i - start));
      if (!vocab.contains(norm)) {
        std::uint32_t id = static_cast<std::uint32_t>(vocab.size());
        if (id >= cfg.buckets) {
          throw ConfigError("build_vocab: vocabulary exceeds bucket count " +
                            std::to_string(cfg.buckets));
        }
        vocab.emplace(norm, id);
      }
    }
  };
  add("#inv");  // reserved token for the inverse direction in textual relation mode
  for (const auto& t : texts) add(t);
  return vocab;
}

}  // namespace fedkgc
