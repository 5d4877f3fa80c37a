#include "fedkgc/eval.hpp"

#include <algorithm>
#include <unordered_map>

#include "fedkgc/errors.hpp"
#include "fedkgc/threads.hpp"

namespace fedkgc {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string query_relation_key(const KnowledgeGraph& g, const Query& q) {
  return make_relation_key(g.relation_text[q.relation], q.dir);
}

bool relation_known(const ModelWeights& w, const Tokenizer& tk, const EncoderConfig& enc,
                    const KnowledgeGraph& g, const Query& q) {
  if (enc.relation_mode == RelationMode::parameterized) {
    return w.contains(relation_param_name(query_relation_key(g, q)));
  }
  return !tk.tokenize_all(g.relation_text[q.relation]).empty();
}

std::vector<double> score_with_flags(const ModelWeights& w, const KnowledgeGraph& g,
                                     const Tokenizer& tk, const EncoderConfig& enc,
                                     const EntityEmbeddingCache& cache, const Query& q,
                                     const EvalConfig& cfg, const std::vector<char>* flags) {
  Embedding e_q =
      encode_relation_aware(w, tk, enc, g.entity_text[q.known], query_relation_key(g, q));
  std::vector<double> scores(g.num_entities());
  for (EntityId t = 0; t < scores.size(); ++t) {
    scores[t] = dot(e_q, cache.embedding(t));
    if (flags && (*flags)[t]) scores[t] += cfg.alpha;
  }
  return scores;
}

}  // namespace

void validate_eval_config(const EvalConfig& cfg) {
  if (cfg.alpha < 0.0) throw ConfigError("eval: alpha must be >= 0");
  if (cfg.k < 1) throw ConfigError("eval: k must be >= 1");
}

EntityEmbeddingCache::EntityEmbeddingCache(const ModelWeights& w, const KnowledgeGraph& g,
                                           const Tokenizer& tk, int threads) {
  auto it = w.find("tok_emb");
  if (it == w.end()) throw TrainError("missing parameter 'tok_emb'");
  dim_ = it->second.cols;
  flat_.resize(g.num_entities() * static_cast<std::size_t>(dim_));
  parallel_for(g.num_entities(), threads, [&](std::size_t e) {
    Embedding emb = encode_entity(w, tk, g.entity_text[e]);
    std::copy(emb.begin(), emb.end(), flat_.begin() + e * static_cast<std::size_t>(dim_));
  });
}

std::optional<std::vector<double>> score_candidates(const ModelWeights& w,
                                                    const KnowledgeGraph& g, const Tokenizer& tk,
                                                    const EncoderConfig& enc,
                                                    const EntityEmbeddingCache& cache,
                                                    const Query& q, const EvalConfig& cfg) {
  validate_eval_config(cfg);
  if (!relation_known(w, tk, enc, g, q)) return std::nullopt;
  if (!cfg.rerank) return score_with_flags(w, g, tk, enc, cache, q, cfg, nullptr);
  std::vector<char> flags = k_hop_flags(g, q.known, cfg.k);
  return score_with_flags(w, g, tk, enc, cache, q, cfg, &flags);
}

int filtered_rank(const std::vector<double>& scores, EntityId gold, const KnownTripleIndex& filter,
                  const Query& q) {
  std::span<const EntityId> known = q.dir == Direction::forward
                                        ? filter.tails(q.known, q.relation)
                                        : filter.heads(q.known, q.relation);
  double gold_score = scores[gold];
  int rank = 1;
  for (EntityId c = 0; c < scores.size(); ++c) {
    if (c == gold) continue;
    if (std::binary_search(known.begin(), known.end(), c)) continue;
    if (scores[c] > gold_score || (scores[c] == gold_score && c < gold)) ++rank;
  }
  return rank;
}

MetricsReport evaluate(const ModelWeights& w, const KnowledgeGraph& g, Split split,
                       const Tokenizer& tk, const EncoderConfig& enc, const EvalConfig& cfg,
                       int threads, std::vector<RankedQueryResult>* dump) {
  validate_eval_config(cfg);
  const auto& triples = g.triples(split);
  if (triples.empty()) {
    throw DataError("client '" + g.client_name + "': split '" + split_name(split) + "' is empty");
  }

  std::vector<Split> splits = cfg.filter == FilterScope::all_splits
                                  ? std::vector<Split>{Split::train, Split::valid, Split::test}
                                  : std::vector<Split>{Split::train};
  KnownTripleIndex filter = build_filter_index(g, splits);
  EntityEmbeddingCache cache(w, g, tk, threads);

  std::vector<Query> queries;
  std::vector<EntityId> golds;
  queries.reserve(2 * triples.size());
  for (const Triple& t : triples) {
    queries.push_back({t.head, t.relation, Direction::forward});
    golds.push_back(t.tail);
    queries.push_back({t.tail, t.relation, Direction::inverse});
    golds.push_back(t.head);
  }

  // Phase 1: k-hop flags per distinct anchor, shared read-only afterwards.
  std::unordered_map<EntityId, std::size_t> anchor_slot;
  std::vector<std::vector<char>> anchor_flags;
  if (cfg.rerank) {
    std::vector<EntityId> anchors;
    for (const Query& q : queries) {
      if (anchor_slot.try_emplace(q.known, anchors.size()).second) anchors.push_back(q.known);
    }
    anchor_flags.resize(anchors.size());
    parallel_for(anchors.size(), threads,
                 [&](std::size_t i) { anchor_flags[i] = k_hop_flags(g, anchors[i], cfg.k); });
  }

  // Phase 2: rank every query into its own slot.
  std::vector<int> ranks(queries.size(), 0);  // 0 = skipped
  std::vector<RankedQueryResult> records(dump ? queries.size() : 0);
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    const Query& q = queries[i];
    if (!relation_known(w, tk, enc, g, q)) return;
    const std::vector<char>* flags = cfg.rerank ? &anchor_flags[anchor_slot.at(q.known)] : nullptr;
    std::vector<double> scores = score_with_flags(w, g, tk, enc, cache, q, cfg, flags);
    ranks[i] = filtered_rank(scores, golds[i], filter, q);
    if (dump) {
      RankedQueryResult rec;
      rec.query = q;
      rec.gold = golds[i];
      rec.rank = ranks[i];
      std::vector<EntityId> order(scores.size());
      for (EntityId e = 0; e < order.size(); ++e) order[e] = e;
      std::size_t top = std::min<std::size_t>(10, order.size());
      std::partial_sort(order.begin(), order.begin() + top, order.end(),
                        [&](EntityId a, EntityId b) {
                          return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                        });
      for (std::size_t j = 0; j < top; ++j) rec.top10.emplace_back(order[j], scores[order[j]]);
      records[i] = std::move(rec);
    }
  });

  MetricsReport rep;
  double mrr_sum[2] = {0, 0};
  std::int64_t h1[2] = {0, 0}, h10[2] = {0, 0}, count[2] = {0, 0};
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (ranks[i] == 0) {
      ++rep.skipped_count;
      continue;
    }
    int dir = queries[i].dir == Direction::forward ? 0 : 1;
    ++count[dir];
    mrr_sum[dir] += 1.0 / ranks[i];
    if (ranks[i] <= 1) ++h1[dir];
    if (ranks[i] <= 10) ++h10[dir];
  }
  auto fill = [](DirectionMetrics& m, double mrr_sum, std::int64_t h1, std::int64_t h10,
                 std::int64_t count) {
    m.query_count = count;
    if (count == 0) return;
    m.mrr = 100.0 * mrr_sum / count;
    m.hits1 = 100.0 * h1 / count;
    m.hits10 = 100.0 * h10 / count;
  };
  fill(rep.tail, mrr_sum[0], h1[0], h10[0], count[0]);
  fill(rep.head, mrr_sum[1], h1[1], h10[1], count[1]);
  rep.query_count = count[0] + count[1];
  if (rep.query_count > 0) {
    rep.mrr = 100.0 * (mrr_sum[0] + mrr_sum[1]) / rep.query_count;
    rep.hits1 = 100.0 * (h1[0] + h1[1]) / rep.query_count;
    rep.hits10 = 100.0 * (h10[0] + h10[1]) / rep.query_count;
  }
  if (dump) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (ranks[i] != 0) dump->push_back(std::move(records[i]));
    }
  }
  return rep;
}

}  // namespace fedkgc
