// Microbenchmarks for the training and evaluation hot paths, run against a
// generated mid-size client graph.

#include <benchmark/benchmark.h>

#include <span>
#include <vector>

#include "fedkgc/adam.hpp"
#include "fedkgc/datagen.hpp"
#include "fedkgc/encoder.hpp"
#include "fedkgc/eval.hpp"
#include "fedkgc/federation.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/loss.hpp"
#include "fedkgc/tokenizer.hpp"

namespace {

using namespace fedkgc;

struct Fixture {
  KnowledgeGraph g;
  EncoderConfig enc;
  Tokenizer tk;
  TrainConfig train;
  ModelWeights w;

  Fixture()
      : g(make_fixture_graph()), enc(), tk(enc.tokenizer), train(),
        w(init_weights(enc, g.relation_text, 7)) {}

  static KnowledgeGraph make_fixture_graph() {
    GenConfig cfg;
    cfg.clients = 1;
    cfg.entities = 500;
    cfg.relations = 20;
    cfg.facts = 2000;
    cfg.fractions = {1.0};
    cfg.seed = 7;
    LatentWorld world = build_world(cfg);
    return generate_clients(cfg, world)[0].kg;
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_encode_entity(benchmark::State& state) {
  Fixture& f = fixture();
  EntityId e = 0;
  for (auto _ : state) {
    Embedding emb = encode_entity(f.w, f.tk, f.g.entity_text[e]);
    benchmark::DoNotOptimize(emb);
    e = (e + 1) % static_cast<EntityId>(f.g.num_entities());
  }
}
BENCHMARK(bm_encode_entity);

void bm_batch_loss(benchmark::State& state) {
  Fixture& f = fixture();
  auto batch_size = static_cast<std::size_t>(state.range(0));
  std::span<const Triple> batch(f.g.train.data(), batch_size);
  for (auto _ : state) {
    BatchResult r = batch_loss(f.w, f.g, batch, f.tk, f.enc, f.train);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(bm_batch_loss)->Arg(16)->Arg(64)->Arg(384);

void bm_adam_step(benchmark::State& state) {
  Fixture& f = fixture();
  std::span<const Triple> batch(f.g.train.data(), 64);
  BatchResult r = batch_loss(f.w, f.g, batch, f.tk, f.enc, f.train);
  ModelWeights w = f.w;
  AdamState adam;
  for (auto _ : state) {
    adam_step(w, r.grads, adam, f.train);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(bm_adam_step);

void bm_aggregate(benchmark::State& state) {
  Fixture& f = fixture();
  std::vector<ModelWeights> models(3, f.w);
  for (auto _ : state) {
    ModelWeights g = aggregate({{&models[0], 5.0, 0}, {&models[1], 3.0, 1}, {&models[2], 1.0, 2}},
                               AggregationScope::shared_names);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(bm_aggregate);

void bm_k_hop_flags(benchmark::State& state) {
  Fixture& f = fixture();
  EntityId e = 0;
  for (auto _ : state) {
    std::vector<char> flags = k_hop_flags(f.g, e, 5);
    benchmark::DoNotOptimize(flags);
    e = (e + 1) % static_cast<EntityId>(f.g.num_entities());
  }
}
BENCHMARK(bm_k_hop_flags);

void bm_score_candidates(benchmark::State& state) {
  Fixture& f = fixture();
  EntityEmbeddingCache cache(f.w, f.g, f.tk, 1);
  EvalConfig cfg;
  std::size_t i = 0;
  for (auto _ : state) {
    const Triple& t = f.g.test[i % f.g.test.size()];
    Query q{t.head, t.relation, Direction::forward};
    auto scores = score_candidates(f.w, f.g, f.tk, f.enc, cache, q, cfg);
    benchmark::DoNotOptimize(scores);
    ++i;
  }
}
BENCHMARK(bm_score_candidates);

}  // namespace

BENCHMARK_MAIN();
