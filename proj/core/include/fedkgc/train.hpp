#pragma once
// Local training: shuffled mini-batches over one client's train split,
// driven by the contrastive loss and sparse Adam. Fully deterministic in
// (cfg.seed, round, client).

#include <cstdint>
#include <vector>

#include "fedkgc/encoder.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/loss.hpp"

namespace fedkgc {

struct StepMetric {
  int round = 0;
  int client = 0;
  int step = 0;  // 0-based within one train_local call
  double loss = 0.0;
};

// Runs cfg.epochs_per_round epochs over g's train split, updating w in
// place. Each epoch reshuffles with a PRNG keyed by (cfg.seed, round,
// client); a trailing partial batch is kept when it has >= 2 triples and
// dropped otherwise. Optimizer state is fresh per call: a client restarts
// its moments whenever it receives new weights. Returns the mean step loss;
// appends one StepMetric per step when metrics is non-null.
// Throws TrainError when the train split cannot form a single batch.
double train_local(ModelWeights& w, const KnowledgeGraph& g, const Tokenizer& tk,
                   const EncoderConfig& enc, const TrainConfig& cfg, int round, int client,
                   std::vector<StepMetric>* metrics);

}  // namespace fedkgc
