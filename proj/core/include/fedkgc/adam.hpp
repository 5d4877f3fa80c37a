#pragma once
// Adaptive-moment optimizer over sparse row gradients: moments live only on
// rows that have received a gradient, and bias correction uses one step
// counter shared by all parameters, matching the usual sparse-Adam
// semantics. Untouched rows keep their moments unchanged.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedkgc/loss.hpp"
#include "fedkgc/tensor.hpp"

namespace fedkgc {

struct AdamRowState {
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamState {
  std::int64_t step = 0;
  std::map<std::string, std::map<std::uint32_t, AdamRowState>, std::less<>> rows;
};

// One update: advances the step counter, then for every gradient row applies
// m = b1*m + (1-b1)*g, v = b2*v + (1-b2)*g^2,
// w -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
// Throws TrainError on unknown parameter names or shape mismatches.
void adam_step(ModelWeights& w, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg);

}  // namespace fedkgc
