#pragma once
// Server/client round loop: client selection, local training dispatch,
// weighted weight aggregation, plus the data-aggregation ablation and the
// isolated-training baseline.
//
// Privacy boundary: FederatedClient's public surface exposes weights and
// relation-key metadata only; no operation returns triples or entity texts.
// run_data_aggregation deliberately works on raw KnowledgeGraphs instead,
// which is exactly the boundary violation that ablation models.

#include <cstdint>
#include <string>
#include <vector>

#include "fedkgc/encoder.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/tensor.hpp"
#include "fedkgc/train.hpp"

namespace fedkgc {

enum class SelectionStrategy { sequential, random };
enum class ClientWeighting { equal, triple_count };
enum class AggregationScope { shared_names, tok_emb_only };
enum class RunMode { federated, data_aggregation, isolated };

struct FedConfig {
  int rounds = 30;  // paper profile uses 50
  int clients_per_round = 1;
  SelectionStrategy selection = SelectionStrategy::sequential;
  ClientWeighting weighting = ClientWeighting::equal;
  AggregationScope scope = AggregationScope::shared_names;
  RunMode mode = RunMode::federated;
  std::uint64_t seed = 0;
};

// Throws ConfigError unless rounds >= 1 and 1 <= clients_per_round <= M.
void validate_fed_config(const FedConfig& cfg, int num_clients);

struct RoundLog {
  int round = 0;
  std::vector<int> selected;
  std::vector<double> losses;     // parallel to selected, mean step loss
  std::uint64_t checksum = 0;     // of global weights after aggregation
};

// Sequential: the cyclic block ((round-1)*m + j) mod M, j in [0, m).
// Random: m distinct indices from a PRNG keyed by (seed, round).
// round is 1-based. Throws ConfigError when m is out of [1, M].
std::vector<int> select_clients(SelectionStrategy strategy, int num_clients, int m, int round,
                                std::uint64_t seed);

struct WeightedModel {
  const ModelWeights* weights = nullptr;
  double n = 1.0;  // aggregation weight before normalization
  int client = 0;  // owner index; fixes the summation order
};

// Weighted mean per parameter name, weights renormalized over the inputs
// that own the name. Out-of-scope names and names with a single owner pass
// through from their lowest-index owner. Inputs are ordered by client index
// internally, so the result is literally permutation-invariant; identical
// inputs and single inputs reproduce their tensors bit for bit.
// Throws ConfigError on empty input or non-positive n, TrainError on shape
// mismatch or non-finite values.
ModelWeights aggregate(std::vector<WeightedModel> inputs, AggregationScope scope);

// One simulated client. Holds its private graph and its local weight copy;
// weights move across the boundary by value only.
class FederatedClient {
 public:
  FederatedClient(int index, KnowledgeGraph g, EncoderConfig enc, TrainConfig train,
                  AggregationScope scope);

  int index() const { return index_; }
  std::int64_t train_triple_count() const { return train_triple_count_; }
  // Relation surface texts, for the server's global parameter namespace.
  const std::vector<std::string>& relation_texts() const { return relation_texts_; }
  const ModelWeights& local_weights() const { return local_; }

  // Installs the client's slice of freshly initialized global weights.
  void reset_local(const ModelWeights& global);

  struct TrainOutcome {
    ModelWeights weights;
    double mean_loss = 0.0;
    std::vector<StepMetric> metrics;
  };
  // Merges incoming global weights over the client's parameters (in-scope
  // names from the server, out-of-scope names from the local copy), trains
  // locally, keeps the result as the new local copy, and returns it.
  TrainOutcome train(const ModelWeights& global, int round);

 private:
  int index_;
  KnowledgeGraph g_;
  Tokenizer tk_;
  EncoderConfig enc_;
  TrainConfig train_;
  AggregationScope scope_;
  std::int64_t train_triple_count_;
  std::vector<std::string> relation_texts_;
  std::vector<std::string> owned_params_;
  ModelWeights local_;
};

struct FedResult {
  ModelWeights global;
  std::vector<ModelWeights> locals;  // by client index
  std::vector<RoundLog> rounds;
  std::vector<StepMetric> metrics;
};

// Algorithm: initialize global weights over the union of all clients'
// relation keys (seeded by fed.seed); per round, selected clients train from
// the current global weights (concurrently when threads > 1), and the server
// aggregates their results back into the in-scope global parameters.
// Output is independent of the thread count.
FedResult run_federated(std::vector<FederatedClient>& clients, const FedConfig& fed,
                        const EncoderConfig& enc, int threads);

// Baseline: one client trains alone for the same fed.rounds budget. Performs
// exactly the operations of run_federated with M = 1, bit for bit.
FedResult run_isolated(FederatedClient& client, const FedConfig& fed, const EncoderConfig& enc);

struct DataAggregationResult {
  ModelWeights weights;
  std::vector<RoundLog> rounds;
  std::vector<StepMetric> metrics;
};

// Ablation: pools every client's train triples into one disjoint-union
// graph (relations merged by surface text) and trains a single model for
// fed.rounds rounds, so in-batch negatives span source KGs.
DataAggregationResult run_data_aggregation(const std::vector<KnowledgeGraph>& graphs,
                                           const FedConfig& fed, const TrainConfig& train,
                                           const EncoderConfig& enc);

// The pooled graph run_data_aggregation trains on, exposed for inspection.
KnowledgeGraph pool_graphs(const std::vector<KnowledgeGraph>& graphs);

}  // namespace fedkgc
