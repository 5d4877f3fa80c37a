#include "fedkgc/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include "fedkgc/errors.hpp"

namespace fedkgc {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ConfigError("config: " + path + ": " + why);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) bad(path, "unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad(path + "." + key, "wrong type");
  }
}

void read_enum(const json& obj, const std::string& path, const char* key,
               std::initializer_list<std::pair<const char*, int>> values, int& out) {
  if (!obj.contains(key)) return;
  std::string s;
  read(obj, path, key, s);
  for (const auto& [name, v] : values) {
    if (s == name) {
      out = v;
      return;
    }
  }
  std::string options;
  for (const auto& [name, v] : values) {
    if (!options.empty()) options += ", ";
    options += name;
  }
  bad(path + "." + key, "'" + s + "' is not one of: " + options);
}

}  // namespace

const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::federated: return "federated";
    case RunMode::data_aggregation: return "data_aggregation";
    case RunMode::isolated: return "isolated";
  }
  return "federated";
}

RunMode parse_run_mode(const std::string& name) {
  if (name == "federated") return RunMode::federated;
  if (name == "data_aggregation" || name == "data_agg") return RunMode::data_aggregation;
  if (name == "isolated") return RunMode::isolated;
  throw ConfigError("unknown mode '" + name + "' (federated, data_agg, isolated)");
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  check_keys(j, "$", {"seed", "encoder", "train", "federation", "eval", "gen"});
  read(j, "$", "seed", c.seed);

  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    check_keys(e, "encoder", {"dim", "rel_prefix_len", "relation_mode", "tokenizer"});
    read(e, "encoder", "dim", c.encoder.dim);
    read(e, "encoder", "rel_prefix_len", c.encoder.rel_prefix_len);
    int mode = static_cast<int>(c.encoder.relation_mode);
    read_enum(e, "encoder", "relation_mode",
              {{"parameterized", 0}, {"textual", 1}}, mode);
    c.encoder.relation_mode = static_cast<RelationMode>(mode);
    if (e.contains("tokenizer")) {
      const json& t = e.at("tokenizer");
      check_keys(t, "encoder.tokenizer", {"mode", "buckets", "max_entity_tokens", "lowercase"});
      std::string tmode = "hashed";
      read(t, "encoder.tokenizer", "mode", tmode);
      if (tmode != "hashed") {
        bad("encoder.tokenizer.mode",
            "only 'hashed' is available from config files (vocab mode needs an explicit "
            "vocabulary)");
      }
      read(t, "encoder.tokenizer", "buckets", c.encoder.tokenizer.buckets);
      read(t, "encoder.tokenizer", "max_entity_tokens", c.encoder.tokenizer.max_entity_tokens);
      read(t, "encoder.tokenizer", "lowercase", c.encoder.tokenizer.lowercase);
    }
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "train",
               {"batch_size", "temperature", "margin", "learning_rate", "beta1", "beta2",
                "epsilon", "epochs_per_round"});
    read(t, "train", "batch_size", c.train.batch_size);
    read(t, "train", "temperature", c.train.temperature);
    read(t, "train", "margin", c.train.margin);
    read(t, "train", "learning_rate", c.train.learning_rate);
    read(t, "train", "beta1", c.train.beta1);
    read(t, "train", "beta2", c.train.beta2);
    read(t, "train", "epsilon", c.train.epsilon);
    read(t, "train", "epochs_per_round", c.train.epochs_per_round);
  }

  if (j.contains("federation")) {
    const json& f = j.at("federation");
    check_keys(f, "federation",
               {"rounds", "clients_per_round", "selection", "weighting", "scope", "mode"});
    read(f, "federation", "rounds", c.federation.rounds);
    read(f, "federation", "clients_per_round", c.federation.clients_per_round);
    int v = static_cast<int>(c.federation.selection);
    read_enum(f, "federation", "selection", {{"sequential", 0}, {"random", 1}}, v);
    c.federation.selection = static_cast<SelectionStrategy>(v);
    v = static_cast<int>(c.federation.weighting);
    read_enum(f, "federation", "weighting", {{"equal", 0}, {"triple_count", 1}}, v);
    c.federation.weighting = static_cast<ClientWeighting>(v);
    v = static_cast<int>(c.federation.scope);
    read_enum(f, "federation", "scope", {{"shared_names", 0}, {"tok_emb_only", 1}}, v);
    c.federation.scope = static_cast<AggregationScope>(v);
    if (f.contains("mode")) {
      std::string m;
      read(f, "federation", "mode", m);
      c.federation.mode = parse_run_mode(m);
    }
  }

  if (j.contains("eval")) {
    const json& e = j.at("eval");
    check_keys(e, "eval", {"alpha", "k", "filter", "rerank", "use_local_weights"});
    read(e, "eval", "alpha", c.eval.alpha);
    read(e, "eval", "k", c.eval.k);
    int v = static_cast<int>(c.eval.filter);
    read_enum(e, "eval", "filter", {{"train_only", 0}, {"all_splits", 1}}, v);
    c.eval.filter = static_cast<FilterScope>(v);
    read(e, "eval", "rerank", c.eval.rerank);
    read(e, "eval", "use_local_weights", c.eval.use_local_weights);
  }

  if (j.contains("gen")) {
    const json& g = j.at("gen");
    check_keys(g, "gen",
               {"clients", "entities", "relations", "facts", "clusters", "fractions", "surface",
                "split"});
    read(g, "gen", "clients", c.gen.clients);
    read(g, "gen", "entities", c.gen.entities);
    read(g, "gen", "relations", c.gen.relations);
    read(g, "gen", "facts", c.gen.facts);
    read(g, "gen", "clusters", c.gen.clusters);
    read(g, "gen", "fractions", c.gen.fractions);
    int v = static_cast<int>(c.gen.surface);
    read_enum(g, "gen", "surface", {{"shared", 0}, {"distinct", 1}}, v);
    c.gen.surface = static_cast<SurfaceMode>(v);
    if (g.contains("split")) {
      std::vector<double> s;
      read(g, "gen", "split", s);
      if (s.size() != 3) bad("gen.split", "expected [train, valid, test]");
      c.gen.train_frac = s[0];
      c.gen.valid_frac = s[1];
      c.gen.test_frac = s[2];
    }
  }

  c.train.seed = c.seed;
  c.federation.seed = c.seed;
  c.gen.seed = c.seed;

  validate_encoder_config(c.encoder);
  validate_train_config(c.train);
  validate_eval_config(c.eval);
  if (c.federation.rounds < 1) throw ConfigError("config: federation.rounds must be >= 1");
  if (c.federation.clients_per_round < 1) {
    throw ConfigError("config: federation.clients_per_round must be >= 1");
  }
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["encoder"] = {
      {"dim", c.encoder.dim},
      {"rel_prefix_len", c.encoder.rel_prefix_len},
      {"relation_mode",
       c.encoder.relation_mode == RelationMode::parameterized ? "parameterized" : "textual"},
      {"tokenizer",
       {{"mode", "hashed"},
        {"buckets", c.encoder.tokenizer.buckets},
        {"max_entity_tokens", c.encoder.tokenizer.max_entity_tokens},
        {"lowercase", c.encoder.tokenizer.lowercase}}}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"temperature", c.train.temperature},
                {"margin", c.train.margin},
                {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},
                {"epochs_per_round", c.train.epochs_per_round}};
  j["federation"] = {
      {"rounds", c.federation.rounds},
      {"clients_per_round", c.federation.clients_per_round},
      {"selection",
       c.federation.selection == SelectionStrategy::sequential ? "sequential" : "random"},
      {"weighting", c.federation.weighting == ClientWeighting::equal ? "equal" : "triple_count"},
      {"scope",
       c.federation.scope == AggregationScope::shared_names ? "shared_names" : "tok_emb_only"},
      {"mode", run_mode_name(c.federation.mode)}};
  j["eval"] = {{"alpha", c.eval.alpha},
               {"k", c.eval.k},
               {"filter", c.eval.filter == FilterScope::train_only ? "train_only" : "all_splits"},
               {"rerank", c.eval.rerank},
               {"use_local_weights", c.eval.use_local_weights}};
  j["gen"] = {{"clients", c.gen.clients},
              {"entities", c.gen.entities},
              {"relations", c.gen.relations},
              {"facts", c.gen.facts},
              {"clusters", c.gen.clusters},
              {"fractions", c.gen.fractions},
              {"surface", c.gen.surface == SurfaceMode::shared ? "shared" : "distinct"},
              {"split", {c.gen.train_frac, c.gen.valid_frac, c.gen.test_frac}}};
  return j;
}

}  // namespace fedkgc
