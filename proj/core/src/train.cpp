#include "fedkgc/train.hpp"

#include <numeric>

#include "fedkgc/adam.hpp"
#include "fedkgc/errors.hpp"
#include "fedkgc/rng.hpp"

namespace fedkgc {

double train_local(ModelWeights& w, const KnowledgeGraph& g, const Tokenizer& tk,
                   const EncoderConfig& enc, const TrainConfig& cfg, int round, int client,
                   std::vector<StepMetric>* metrics) {
  validate_train_config(cfg);
  std::size_t n = g.train.size();
  if (n < 2) {
    throw TrainError("client '" + g.client_name + "': train split too small to form a batch");
  }

  CounterRng rng(derive_key(cfg.seed, "shuffle", static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(client)));
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);

  AdamState state;
  std::vector<Triple> batch;
  double loss_sum = 0.0;
  int steps = 0;
  for (int epoch = 0; epoch < cfg.epochs_per_round; ++epoch) {
    deterministic_shuffle(order, rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::size_t count = std::min<std::size_t>(cfg.batch_size, n - start);
      if (count < 2) break;
      batch.clear();
      for (std::size_t i = 0; i < count; ++i) batch.push_back(g.train[order[start + i]]);
      BatchResult res = batch_loss(w, g, batch, tk, enc, cfg);
      adam_step(w, res.grads, state, cfg);
      if (metrics) metrics->push_back({round, client, steps, res.loss});
      loss_sum += res.loss;
      ++steps;
    }
  }
  return loss_sum / steps;
}

}  // namespace fedkgc
