#include "fedkgc/adam.hpp"

#include <cmath>

#include "fedkgc/errors.hpp"

namespace fedkgc {

void adam_step(ModelWeights& w, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  for (const auto& [name, grad] : grads) {
    auto it = w.find(name);
    if (it == w.end()) throw TrainError("adam: gradient for unknown parameter '" + name + "'");
    Tensor& t = it->second;
    if (grad.cols != t.cols) throw TrainError("adam: column mismatch for '" + name + "'");
    auto& param_state = state.rows[name];
    for (const auto& [r, g] : grad.rows) {
      if (static_cast<int>(r) >= t.rows) {
        throw TrainError("adam: row " + std::to_string(r) + " out of range for '" + name + "'");
      }
      AdamRowState& rs = param_state[r];
      if (rs.m.empty()) {
        rs.m.assign(g.size(), 0.0);
        rs.v.assign(g.size(), 0.0);
      }
      auto row = t.row(static_cast<int>(r));
      for (std::size_t j = 0; j < g.size(); ++j) {
        rs.m[j] = cfg.beta1 * rs.m[j] + (1.0 - cfg.beta1) * g[j];
        rs.v[j] = cfg.beta2 * rs.v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
        row[j] -= cfg.learning_rate * (rs.m[j] / bc1) / (std::sqrt(rs.v[j] / bc2) + cfg.epsilon);
      }
    }
  }
}

}  // namespace fedkgc
