#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fedkgc/encoder.hpp"
#include "fedkgc/errors.hpp"

using namespace fedkgc;

namespace {

// Pinned token ids via an explicit vocabulary: #inv=0, red=1, fox=2, box=3.
TokenizerConfig vocab_cfg() {
  TokenizerConfig cfg;
  cfg.mode = TokenizerMode::vocab;
  cfg.buckets = 8;
  return cfg;
}

Tokenizer vocab_tokenizer() {
  return {vocab_cfg(), {{"#inv", 0u}, {"red", 1u}, {"fox", 2u}, {"box", 3u}}};
}

ModelWeights fixture_weights() {
  ModelWeights w;
  Tensor tok(8, 2);
  tok.at(0, 0) = 0.5;
  tok.at(0, 1) = -0.5;  // #inv
  tok.at(1, 0) = 1.0;
  tok.at(1, 1) = 2.0;  // red
  tok.at(2, 0) = 3.0;
  tok.at(2, 1) = -2.0;  // fox
  tok.at(3, 0) = -1.0;
  tok.at(3, 1) = 0.0;  // box
  w.emplace("tok_emb", std::move(tok));
  Tensor prefix(2, 2);
  prefix.at(0, 0) = 0.2;
  prefix.at(0, 1) = 0.4;
  prefix.at(1, 0) = -0.6;
  prefix.at(1, 1) = 0.8;
  w.emplace("rel_prefix/likes#fwd", std::move(prefix));
  return w;
}

double norm2(const Embedding& e) {
  double s = 0.0;
  for (double x : e) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("encode_entity mean-pools and normalizes exactly") {
  auto tk = vocab_tokenizer();
  ModelWeights w = fixture_weights();
  Embedding e = encode_entity(w, tk, "red fox");
  // mean = ((1,2) + (3,-2)) / 2 = (2, 0); normalized = (1, 0).
  CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(0.0).epsilon(1e-15));

  EncodeTrace tr = encode_entity_traced(w, tk, "red fox");
  CHECK(tr.rel_param.empty());
  CHECK(tr.entity_rows == std::vector<std::uint32_t>{1, 2});
  CHECK(tr.inv_count == doctest::Approx(0.5));
  CHECK(tr.norm == doctest::Approx(2.0));
  CHECK(tr.e == e);
}

TEST_CASE("repeated tokens pool with multiplicity") {
  auto tk = vocab_tokenizer();
  ModelWeights w = fixture_weights();
  EncodeTrace tr = encode_entity_traced(w, tk, "red red fox");
  CHECK(tr.entity_rows == std::vector<std::uint32_t>{1, 1, 2});
  // mean = ((1,2)+(1,2)+(3,-2))/3 = (5/3, 2/3).
  double nx = 5.0 / 3.0, ny = 2.0 / 3.0;
  double n = std::sqrt(nx * nx + ny * ny);
  CHECK(tr.e[0] == doctest::Approx(nx / n).epsilon(1e-15));
  CHECK(tr.e[1] == doctest::Approx(ny / n).epsilon(1e-15));
}

TEST_CASE("relation keys build and parse both directions") {
  CHECK(make_relation_key("born in", Direction::forward) == "born in#fwd");
  CHECK(make_relation_key("born in", Direction::inverse) == "born in#inv");
  auto parts = parse_relation_key("born in#inv");
  CHECK(parts.text == "born in");
  CHECK(parts.dir == Direction::inverse);
  CHECK(relation_param_name("born in#fwd") == "rel_prefix/born in#fwd");
  CHECK_THROWS_AS(parse_relation_key("no suffix"), ConfigError);
}

TEST_CASE("parameterized relation-aware encoding pools prefix rows first") {
  auto tk = vocab_tokenizer();
  ModelWeights w = fixture_weights();
  EncoderConfig cfg;
  cfg.dim = 2;
  cfg.rel_prefix_len = 2;
  cfg.tokenizer = vocab_cfg();
  EncodeTrace tr = encode_relation_aware_traced(w, tk, cfg, "red fox", "likes#fwd");
  CHECK(tr.rel_param == "rel_prefix/likes#fwd");
  CHECK(tr.rel_rows == std::vector<std::uint32_t>{0, 1});
  CHECK(tr.entity_rows == std::vector<std::uint32_t>{1, 2});
  CHECK(tr.inv_count == doctest::Approx(0.25));
  // mean = ((0.2,0.4)+(-0.6,0.8)+(1,2)+(3,-2))/4 = (0.9, 0.3).
  double n = std::sqrt(0.9 * 0.9 + 0.3 * 0.3);
  CHECK(tr.e[0] == doctest::Approx(0.9 / n).epsilon(1e-15));
  CHECK(tr.e[1] == doctest::Approx(0.3 / n).epsilon(1e-15));
  CHECK(norm2(tr.e) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(encode_relation_aware(w, tk, cfg, "red fox", "hates#fwd"), TrainError);
}

TEST_CASE("textual relation mode pools relation tokens, inverse appends #inv") {
  auto tk = vocab_tokenizer();
  ModelWeights w = fixture_weights();
  EncoderConfig cfg;
  cfg.dim = 2;
  cfg.relation_mode = RelationMode::textual;
  cfg.tokenizer = vocab_cfg();
  EncodeTrace fwd = encode_relation_aware_traced(w, tk, cfg, "fox", "box#fwd");
  CHECK(fwd.rel_param == "tok_emb");
  CHECK(fwd.rel_rows == std::vector<std::uint32_t>{3});
  CHECK(fwd.entity_rows == std::vector<std::uint32_t>{2});

  EncodeTrace inv = encode_relation_aware_traced(w, tk, cfg, "fox", "box#inv");
  CHECK(inv.rel_rows == std::vector<std::uint32_t>{3, 0});
  CHECK(inv.inv_count == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("unusable text raises the right error class") {
  auto tk = vocab_tokenizer();
  ModelWeights w = fixture_weights();
  CHECK_THROWS_AS(encode_entity(w, tk, ""), DataError);
  CHECK_THROWS_AS(encode_entity(w, tk, "unknownword"), DataError);

  ModelWeights zeros;
  zeros.emplace("tok_emb", Tensor(8, 2));
  CHECK_THROWS_AS(encode_entity(zeros, tk, "red fox"), TrainError);
}

TEST_CASE("init_weights shapes, bounds, and per-name determinism") {
  EncoderConfig cfg;
  cfg.dim = 16;
  cfg.rel_prefix_len = 3;
  cfg.tokenizer.buckets = 64;
  ModelWeights w = init_weights(cfg, {"likes", "made of"}, 9);
  REQUIRE(w.contains("tok_emb"));
  CHECK(w.at("tok_emb").rows == 64);
  CHECK(w.at("tok_emb").cols == 16);
  for (const char* name : {"rel_prefix/likes#fwd", "rel_prefix/likes#inv",
                           "rel_prefix/made of#fwd", "rel_prefix/made of#inv"}) {
    REQUIRE(w.contains(name));
    CHECK(w.at(name).rows == 3);
    CHECK(w.at(name).cols == 16);
  }
  CHECK(w.size() == 5);

  double bound = 0.5 / std::sqrt(16.0);
  for (const auto& [name, t] : w) {
    for (double x : t.data) {
      CHECK(std::abs(x) <= bound);
    }
  }

  // Values depend only on (seed, name): dropping a relation or reordering
  // leaves the survivors bit-identical.
  ModelWeights w2 = init_weights(cfg, {"made of"}, 9);
  CHECK(w2.at("tok_emb").data == w.at("tok_emb").data);
  CHECK(w2.at("rel_prefix/made of#fwd").data == w.at("rel_prefix/made of#fwd").data);

  ModelWeights other_seed = init_weights(cfg, {"likes", "made of"}, 10);
  CHECK(other_seed.at("tok_emb").data != w.at("tok_emb").data);

  CHECK_THROWS_AS(init_weights(cfg, {}, 9), ConfigError);
  CHECK_THROWS_AS(init_weights(cfg, {"likes", "likes"}, 9), ConfigError);
  CHECK_THROWS_AS(init_weights(cfg, {""}, 9), ConfigError);
}

TEST_CASE("textual mode init carries only the token table") {
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.relation_mode = RelationMode::textual;
  cfg.tokenizer.buckets = 32;
  ModelWeights w = init_weights(cfg, {"likes"}, 1);
  CHECK(w.size() == 1);
  CHECK(w.contains("tok_emb"));
}

TEST_CASE("every encoding is unit-norm under random weights") {
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.rel_prefix_len = 2;
  cfg.tokenizer.buckets = 32;
  Tokenizer tk(cfg.tokenizer);
  ModelWeights w = init_weights(cfg, {"r one", "r two"}, 5);
  for (const char* text : {"alpha", "alpha beta", "gamma delta epsilon"}) {
    CHECK(norm2(encode_entity(w, tk, text)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm2(encode_relation_aware(w, tk, cfg, text, "r one#fwd")) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm2(encode_relation_aware(w, tk, cfg, text, "r two#inv")) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("encoder config validation") {
  EncoderConfig cfg;
  cfg.dim = 1;
  CHECK_THROWS_AS(validate_encoder_config(cfg), ConfigError);
  cfg.dim = 8;
  cfg.rel_prefix_len = 0;
  CHECK_THROWS_AS(validate_encoder_config(cfg), ConfigError);
}
