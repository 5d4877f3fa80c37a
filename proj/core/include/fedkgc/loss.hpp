#pragma once
// Contrastive batch loss with in-batch negatives, additive margin on the
// positive similarity, and exact analytic gradients through dot product,
// L2 normalization, and mean pooling.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedkgc/encoder.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/tensor.hpp"

namespace fedkgc {

struct TrainConfig {
  int batch_size = 64;          // paper profile uses 384
  double temperature = 0.05;    // tau
  double margin = 0.02;         // gamma
  double learning_rate = 1e-3;  // paper profile uses 5e-5 (pretrained-LM rate)
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs_per_round = 1;
  std::uint64_t seed = 0;
};

// Throws ConfigError unless tau > 0, gamma >= 0, batch_size >= 2, lr >= 0,
// betas in [0, 1), epsilon > 0, epochs >= 1.
void validate_train_config(const TrainConfig& cfg);

// Gradient rows for one parameter; untouched rows absent.
struct SparseGrad {
  int cols = 0;
  std::map<std::uint32_t, std::vector<double>> rows;
};
using GradientSet = std::map<std::string, SparseGrad, std::less<>>;

// Loss of a single (query, target) pair from raw similarities:
// -log( exp((pos-gamma)/tau) / (exp((pos-gamma)/tau) + sum_j exp(neg_j/tau)) )
// evaluated via log-sum-exp; exactly 0 when negs is empty.
double contrastive_pair_loss(double pos_sim, std::span<const double> neg_sims, double gamma,
                             double tau);

struct BatchResult {
  double loss = 0.0;
  GradientSet grads;
};

// Mean pair loss over the 2n (query, target) pairs of an n-triple batch:
// each triple contributes (h,r)->t and (t,r')->h. Negatives for a pair are
// the other same-direction pairs' target embeddings, skipping any whose
// entity id equals the pair's gold id. Pairs left with no negatives
// contribute 0; a batch where every pair has none is an error.
// Throws TrainError on such degenerate batches, DataError on unusable text.
BatchResult batch_loss(const ModelWeights& w, const KnowledgeGraph& g,
                       std::span<const Triple> batch, const Tokenizer& tk,
                       const EncoderConfig& enc, const TrainConfig& cfg);

}  // namespace fedkgc
