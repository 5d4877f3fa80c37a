#pragma once
// Link-prediction evaluation: cosine scoring with k-hop re-rank bonus,
// filtered ranking, and MRR / Hits@k reporting over both query directions.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fedkgc/encoder.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/tensor.hpp"

namespace fedkgc {

enum class FilterScope { train_only, all_splits };

struct EvalConfig {
  double alpha = 0.01;  // re-rank bonus
  int k = 5;            // neighborhood hop count
  FilterScope filter = FilterScope::all_splits;
  bool rerank = true;
  bool use_local_weights = false;  // evaluate clients on their last-local weights
};

// Throws ConfigError unless alpha >= 0 and k >= 1.
void validate_eval_config(const EvalConfig& cfg);

// direction forward = tail prediction (h, r, ?): known = h, gold = t.
// direction inverse = head prediction (?, r, t): known = t, gold = h.
struct Query {
  EntityId known = 0;
  RelationId relation = 0;
  Direction dir = Direction::forward;
};

// Unit-norm embedding per entity, computed once per evaluation pass.
class EntityEmbeddingCache {
 public:
  EntityEmbeddingCache(const ModelWeights& w, const KnowledgeGraph& g, const Tokenizer& tk,
                       int threads);
  std::span<const double> embedding(EntityId e) const {
    return {flat_.data() + static_cast<std::size_t>(e) * dim_, static_cast<std::size_t>(dim_)};
  }
  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<double> flat_;
};

// Score per entity: cos(query embedding, entity embedding) plus alpha when
// the entity lies in the k-hop neighborhood of the query's known entity.
// nullopt when the query's relation key is absent from the weights (the
// query is skipped and counted by evaluate).
std::optional<std::vector<double>> score_candidates(const ModelWeights& w,
                                                    const KnowledgeGraph& g, const Tokenizer& tk,
                                                    const EncoderConfig& enc,
                                                    const EntityEmbeddingCache& cache,
                                                    const Query& q, const EvalConfig& cfg);

// 1-based rank of gold among unfiltered candidates, scores descending, ties
// by ascending entity id. Candidates forming other known triples for this
// query are removed; gold itself never is.
int filtered_rank(const std::vector<double>& scores, EntityId gold, const KnownTripleIndex& filter,
                  const Query& q);

struct RankedQueryResult {
  Query query;
  EntityId gold = 0;
  int rank = 0;
  std::vector<std::pair<EntityId, double>> top10;  // unfiltered candidates
};

struct DirectionMetrics {
  std::int64_t query_count = 0;
  double mrr = 0.0;  // percent
  double hits1 = 0.0;
  double hits10 = 0.0;
};

struct MetricsReport {
  std::int64_t query_count = 0;    // ranked queries
  std::int64_t skipped_count = 0;  // relation key unseen in training
  double mrr = 0.0;                // percent
  double hits1 = 0.0;
  double hits10 = 0.0;
  DirectionMetrics tail;
  DirectionMetrics head;
};

// Issues both directions for every triple of the split. Query processing is
// parallel with a deterministic merge: the report is a pure function of
// (weights, graph, config). When dump is non-null it receives one record per
// ranked query in query order. Throws DataError on an empty split.
MetricsReport evaluate(const ModelWeights& w, const KnowledgeGraph& g, Split split,
                       const Tokenizer& tk, const EncoderConfig& enc, const EvalConfig& cfg,
                       int threads, std::vector<RankedQueryResult>* dump = nullptr);

}  // namespace fedkgc
