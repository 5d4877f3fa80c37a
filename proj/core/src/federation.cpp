#include "fedkgc/federation.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fedkgc/errors.hpp"
#include "fedkgc/rng.hpp"
#include "fedkgc/threads.hpp"

namespace fedkgc {
namespace {

bool in_scope(std::string_view name, AggregationScope scope) {
  return scope == AggregationScope::shared_names || name == "tok_emb";
}

std::vector<std::string> union_relation_texts(const std::vector<FederatedClient>& clients) {
  std::set<std::string> texts;
  for (const auto& c : clients) {
    texts.insert(c.relation_texts().begin(), c.relation_texts().end());
  }
  return {texts.begin(), texts.end()};
}

std::vector<std::string> dedup_texts(const std::vector<std::string>& texts) {
  std::set<std::string> s(texts.begin(), texts.end());
  return {s.begin(), s.end()};
}

void append_round(FedResult& result, int round, std::vector<int> selected,
                  std::vector<FederatedClient::TrainOutcome>& outcomes,
                  const ModelWeights& global) {
  RoundLog log;
  log.round = round;
  log.selected = std::move(selected);
  for (auto& out : outcomes) {
    log.losses.push_back(out.mean_loss);
    result.metrics.insert(result.metrics.end(), out.metrics.begin(), out.metrics.end());
  }
  log.checksum = weights_checksum(global);
  result.rounds.push_back(std::move(log));
}

}  // namespace

void validate_fed_config(const FedConfig& cfg, int num_clients) {
  if (cfg.rounds < 1) throw ConfigError("federation: rounds must be >= 1");
  if (cfg.clients_per_round < 1 || cfg.clients_per_round > num_clients) {
    throw ConfigError("federation: clients_per_round must lie in [1, " +
                      std::to_string(num_clients) + "]");
  }
}

std::vector<int> select_clients(SelectionStrategy strategy, int num_clients, int m, int round,
                                std::uint64_t seed) {
  if (m < 1 || m > num_clients) {
    throw ConfigError("select_clients: m must lie in [1, " + std::to_string(num_clients) + "]");
  }
  std::vector<int> out;
  out.reserve(m);
  if (strategy == SelectionStrategy::sequential) {
    for (int j = 0; j < m; ++j) {
      out.push_back(static_cast<int>(
          (static_cast<std::int64_t>(round - 1) * m + j) % num_clients));
    }
    return out;
  }
  std::vector<int> all(num_clients);
  std::iota(all.begin(), all.end(), 0);
  CounterRng rng(derive_key(seed, "select", static_cast<std::uint64_t>(round)));
  for (int i = 0; i < m; ++i) {
    int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(num_clients - i)));
    std::swap(all[i], all[j]);
    out.push_back(all[i]);
  }
  return out;
}

ModelWeights aggregate(std::vector<WeightedModel> inputs, AggregationScope scope) {
  if (inputs.empty()) throw ConfigError("aggregate: no inputs");
  std::sort(inputs.begin(), inputs.end(),
            [](const WeightedModel& a, const WeightedModel& b) { return a.client < b.client; });
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!(inputs[i].n > 0.0)) throw ConfigError("aggregate: weights must be positive");
    if (i > 0 && inputs[i].client == inputs[i - 1].client) {
      throw ConfigError("aggregate: duplicate client index " + std::to_string(inputs[i].client));
    }
    if (!all_finite(*inputs[i].weights)) {
      throw TrainError("aggregate: non-finite values from client " +
                       std::to_string(inputs[i].client));
    }
  }

  std::map<std::string, std::vector<std::size_t>, std::less<>> owners;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto& [name, t] : *inputs[i].weights) owners[name].push_back(i);
  }

  ModelWeights out;
  for (const auto& [name, own] : owners) {
    const Tensor& x0 = inputs[own[0]].weights->find(name)->second;
    if (!in_scope(name, scope) || own.size() == 1) {
      out.emplace(name, x0);
      continue;
    }
    double total = 0.0;
    std::vector<const Tensor*> ts;
    std::vector<double> wk;
    for (std::size_t i : own) {
      const Tensor& t = inputs[i].weights->find(name)->second;
      if (!t.same_shape(x0)) throw TrainError("aggregate: shape mismatch under '" + name + "'");
      ts.push_back(&t);
      total += inputs[i].n;
      wk.push_back(inputs[i].n);
    }
    for (double& v : wk) v /= total;

    // Anchored convex combination x0 + sum_k w_k (x_k - x0): a zero delta
    // leaves the anchor's bits untouched, so single-input and identical-input
    // aggregation are exact.
    Tensor t = x0;
    for (std::size_t e = 0; e < t.data.size(); ++e) {
      double delta = 0.0;
      for (std::size_t k = 1; k < ts.size(); ++k) {
        delta += wk[k] * (ts[k]->data[e] - ts[0]->data[e]);
      }
      if (delta != 0.0) t.data[e] = ts[0]->data[e] + delta;
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

FederatedClient::FederatedClient(int index, KnowledgeGraph g, EncoderConfig enc, TrainConfig train,
                                 AggregationScope scope)
    : index_(index),
      g_(std::move(g)),
      tk_(enc.tokenizer),
      enc_(enc),
      train_(train),
      scope_(scope),
      train_triple_count_(static_cast<std::int64_t>(g_.train.size())),
      relation_texts_(g_.relation_text) {
  if (enc_.tokenizer.mode != TokenizerMode::hashed) {
    throw ConfigError("federation requires the hashed tokenizer (shared id space)");
  }
  owned_params_.emplace_back("tok_emb");
  if (enc_.relation_mode == RelationMode::parameterized) {
    for (const auto& text : relation_texts_) {
      owned_params_.push_back(relation_param_name(make_relation_key(text, Direction::forward)));
      owned_params_.push_back(relation_param_name(make_relation_key(text, Direction::inverse)));
    }
  }
}

void FederatedClient::reset_local(const ModelWeights& global) {
  local_.clear();
  for (const auto& name : owned_params_) {
    auto it = global.find(name);
    if (it == global.end()) {
      throw TrainError("client " + std::to_string(index_) + ": global weights lack '" + name +
                       "'");
    }
    local_.emplace(name, it->second);
  }
}

FederatedClient::TrainOutcome FederatedClient::train(const ModelWeights& global, int round) {
  ModelWeights working;
  for (const auto& name : owned_params_) {
    const ModelWeights& source =
        (in_scope(name, scope_) || !local_.contains(name)) ? global : local_;
    auto it = source.find(name);
    if (it == source.end()) {
      throw TrainError("client " + std::to_string(index_) + ": no source for parameter '" + name +
                       "'");
    }
    working.emplace(name, it->second);
  }
  TrainOutcome out;
  out.mean_loss = train_local(working, g_, tk_, enc_, train_, round, index_, &out.metrics);
  local_ = std::move(working);
  out.weights = local_;
  return out;
}

FedResult run_federated(std::vector<FederatedClient>& clients, const FedConfig& fed,
                        const EncoderConfig& enc, int threads) {
  if (clients.empty()) throw ConfigError("run_federated: no clients");
  for (std::size_t i = 0; i < clients.size(); ++i) {
    if (clients[i].index() != static_cast<int>(i)) {
      throw ConfigError("run_federated: client indices must be 0..M-1 in order");
    }
  }
  validate_fed_config(fed, static_cast<int>(clients.size()));

  FedResult result;
  result.global = init_weights(enc, union_relation_texts(clients), fed.seed);
  for (auto& c : clients) c.reset_local(result.global);

  for (int t = 1; t <= fed.rounds; ++t) {
    auto selected = select_clients(fed.selection, static_cast<int>(clients.size()),
                                   fed.clients_per_round, t, fed.seed);
    std::vector<FederatedClient::TrainOutcome> outcomes(selected.size());
    parallel_for(selected.size(), threads, [&](std::size_t j) {
      try {
        outcomes[j] = clients[selected[j]].train(result.global, t);
      } catch (const Error& e) {
        throw TrainError("round " + std::to_string(t) + ", client " +
                         std::to_string(selected[j]) + ": " + e.what());
      }
    });

    std::vector<WeightedModel> parts;
    for (std::size_t j = 0; j < selected.size(); ++j) {
      double n = fed.weighting == ClientWeighting::equal
                     ? 1.0
                     : static_cast<double>(clients[selected[j]].train_triple_count());
      parts.push_back({&outcomes[j].weights, n, selected[j]});
    }
    ModelWeights agg = aggregate(std::move(parts), fed.scope);
    for (auto& [name, tensor] : agg) {
      if (in_scope(name, fed.scope)) result.global.insert_or_assign(name, std::move(tensor));
    }
    append_round(result, t, std::move(selected), outcomes, result.global);
  }
  for (const auto& c : clients) result.locals.push_back(c.local_weights());
  return result;
}

FedResult run_isolated(FederatedClient& client, const FedConfig& fed, const EncoderConfig& enc) {
  FedConfig solo = fed;
  solo.clients_per_round = 1;
  solo.selection = SelectionStrategy::sequential;

  FedResult result;
  result.global = init_weights(enc, dedup_texts(client.relation_texts()), fed.seed);
  client.reset_local(result.global);
  for (int t = 1; t <= solo.rounds; ++t) {
    std::vector<FederatedClient::TrainOutcome> outcomes(1);
    try {
      outcomes[0] = client.train(result.global, t);
    } catch (const Error& e) {
      throw TrainError("round " + std::to_string(t) + ", client " +
                       std::to_string(client.index()) + ": " + e.what());
    }
    ModelWeights agg = aggregate({{&outcomes[0].weights, 1.0, client.index()}}, solo.scope);
    for (auto& [name, tensor] : agg) {
      if (in_scope(name, solo.scope)) result.global.insert_or_assign(name, std::move(tensor));
    }
    append_round(result, t, {client.index()}, outcomes, result.global);
  }
  result.locals.push_back(client.local_weights());
  return result;
}

KnowledgeGraph pool_graphs(const std::vector<KnowledgeGraph>& graphs) {
  if (graphs.empty()) throw ConfigError("pool_graphs: no graphs");
  std::vector<std::string> entity_text;
  std::vector<std::string> relation_text;
  std::map<std::string, RelationId, std::less<>> rel_id;
  std::vector<Triple> train;
  EntityId offset = 0;
  for (const auto& g : graphs) {
    entity_text.insert(entity_text.end(), g.entity_text.begin(), g.entity_text.end());
    std::vector<RelationId> local_to_pooled;
    for (const auto& text : g.relation_text) {
      auto it = rel_id.find(text);
      if (it == rel_id.end()) {
        it = rel_id.emplace(text, static_cast<RelationId>(relation_text.size())).first;
        relation_text.push_back(text);
      }
      local_to_pooled.push_back(it->second);
    }
    for (const Triple& t : g.train) {
      train.push_back({t.head + offset, local_to_pooled[t.relation], t.tail + offset});
    }
    offset += static_cast<EntityId>(g.entity_text.size());
  }
  return make_kg("pooled", std::move(entity_text), std::move(relation_text), std::move(train), {},
                 {});
}

DataAggregationResult run_data_aggregation(const std::vector<KnowledgeGraph>& graphs,
                                           const FedConfig& fed, const TrainConfig& train,
                                           const EncoderConfig& enc) {
  KnowledgeGraph pooled = pool_graphs(graphs);
  if (enc.tokenizer.mode != TokenizerMode::hashed) {
    throw ConfigError("data aggregation requires the hashed tokenizer");
  }
  Tokenizer tk(enc.tokenizer);

  DataAggregationResult result;
  result.weights = init_weights(enc, pooled.relation_text, fed.seed);
  for (int t = 1; t <= fed.rounds; ++t) {
    std::vector<StepMetric> metrics;
    double loss;
    try {
      loss = train_local(result.weights, pooled, tk, enc, train, t, 0, &metrics);
    } catch (const Error& e) {
      throw TrainError("round " + std::to_string(t) + ", pooled model: " + std::string(e.what()));
    }
    result.metrics.insert(result.metrics.end(), metrics.begin(), metrics.end());
    result.rounds.push_back({t, {0}, {loss}, weights_checksum(result.weights)});
  }
  return result;
}

}  // namespace fedkgc
