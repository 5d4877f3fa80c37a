#include "fedkgc/loss.hpp"

#include <algorithm>
#include <cmath>

#include "fedkgc/errors.hpp"

namespace fedkgc {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// dL/d(pooled rows) from dL/de through normalization and mean pooling.
void accumulate_trace_grad(const EncodeTrace& tr, std::span<const double> g_e,
                           GradientSet& grads) {
  std::size_t d = g_e.size();
  double ge_dot_e = dot(g_e, tr.e);
  std::vector<double> g_row(d);
  for (std::size_t j = 0; j < d; ++j) {
    g_row[j] = (g_e[j] - ge_dot_e * tr.e[j]) / tr.norm * tr.inv_count;
  }
  auto add = [&](const std::string& param, const std::vector<std::uint32_t>& rows) {
    if (rows.empty()) return;
    SparseGrad& sg = grads[param];
    sg.cols = static_cast<int>(d);
    for (std::uint32_t r : rows) {
      auto& row = sg.rows[r];
      if (row.empty()) row.assign(d, 0.0);
      for (std::size_t j = 0; j < d; ++j) row[j] += g_row[j];
    }
  };
  if (!tr.rel_param.empty()) add(tr.rel_param, tr.rel_rows);
  add("tok_emb", tr.entity_rows);
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (!(cfg.temperature > 0.0)) throw ConfigError("train: temperature must be > 0");
  if (cfg.margin < 0.0) throw ConfigError("train: margin must be >= 0");
  if (cfg.learning_rate < 0.0) throw ConfigError("train: learning_rate must be >= 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
    throw ConfigError("train: betas must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) throw ConfigError("train: epsilon must be > 0");
  if (cfg.epochs_per_round < 1) throw ConfigError("train: epochs_per_round must be >= 1");
}

double contrastive_pair_loss(double pos_sim, std::span<const double> neg_sims, double gamma,
                             double tau) {
  double a_pos = (pos_sim - gamma) / tau;
  double m = a_pos;
  for (double s : neg_sims) m = std::max(m, s / tau);
  double z = std::exp(a_pos - m);
  for (double s : neg_sims) z += std::exp(s / tau - m);
  return std::log(z) + m - a_pos;
}

BatchResult batch_loss(const ModelWeights& w, const KnowledgeGraph& g,
                       std::span<const Triple> batch, const Tokenizer& tk,
                       const EncoderConfig& enc, const TrainConfig& cfg) {
  if (batch.size() < 2) throw TrainError("batch must contain at least 2 triples");
  std::size_t n = batch.size();
  std::size_t d = static_cast<std::size_t>(enc.dim);

  // One target embedding per distinct entity; queries are per pair.
  std::vector<EncodeTrace> targets;
  std::vector<std::vector<double>> target_grads;
  std::unordered_map<EntityId, int> target_slot;
  auto slot_of = [&](EntityId e) {
    auto [it, fresh] = target_slot.try_emplace(e, static_cast<int>(targets.size()));
    if (fresh) {
      targets.push_back(encode_entity_traced(w, tk, g.entity_text[e]));
      target_grads.emplace_back(d, 0.0);
    }
    return it->second;
  };

  struct Pair {
    EncodeTrace query;
    std::vector<double> query_grad;
    int gold_slot;
    EntityId gold_id;
  };
  std::vector<Pair> pairs;
  pairs.reserve(2 * n);
  for (int dir = 0; dir < 2; ++dir) {
    for (const Triple& t : batch) {
      Pair p;
      EntityId query_e = dir == 0 ? t.head : t.tail;
      p.gold_id = dir == 0 ? t.tail : t.head;
      std::string key = make_relation_key(g.relation_text[t.relation],
                                          dir == 0 ? Direction::forward : Direction::inverse);
      p.query = encode_relation_aware_traced(w, tk, enc, g.entity_text[query_e], key);
      p.query_grad.assign(d, 0.0);
      p.gold_slot = slot_of(p.gold_id);
      pairs.push_back(std::move(p));
    }
  }

  double inv_pairs = 1.0 / static_cast<double>(pairs.size());
  double loss_sum = 0.0;
  std::size_t empty_pairs = 0;
  std::vector<int> neg_slots;
  std::vector<double> neg_a;
  for (std::size_t dir = 0; dir < 2; ++dir) {
    for (std::size_t i = 0; i < n; ++i) {
      Pair& p = pairs[dir * n + i];
      neg_slots.clear();
      neg_a.clear();
      for (std::size_t j = 0; j < n; ++j) {
        const Pair& q = pairs[dir * n + j];
        if (j == i || q.gold_id == p.gold_id) continue;
        neg_slots.push_back(q.gold_slot);
        neg_a.push_back(dot(p.query.e, targets[q.gold_slot].e) / cfg.temperature);
      }
      if (neg_slots.empty()) {
        ++empty_pairs;
        continue;
      }
      double a_pos = (dot(p.query.e, targets[p.gold_slot].e) - cfg.margin) / cfg.temperature;
      double m = a_pos;
      for (double a : neg_a) m = std::max(m, a);
      double z_pos = std::exp(a_pos - m);
      double z = z_pos;
      for (double a : neg_a) z += std::exp(a - m);
      loss_sum += std::log(z) + m - a_pos;

      // dL/d(similarity) scaled by the 1/(2n) mean and 1/tau chain factor.
      double coef = inv_pairs / (cfg.temperature * z);
      double c_pos = coef * (z_pos - z);  // (P_pos - 1) / tau / (2n)
      const auto& y_pos = targets[p.gold_slot].e;
      for (std::size_t k = 0; k < d; ++k) {
        p.query_grad[k] += c_pos * y_pos[k];
        target_grads[p.gold_slot][k] += c_pos * p.query.e[k];
      }
      for (std::size_t jn = 0; jn < neg_slots.size(); ++jn) {
        double c_neg = coef * std::exp(neg_a[jn] - m);
        const auto& y_neg = targets[neg_slots[jn]].e;
        for (std::size_t k = 0; k < d; ++k) {
          p.query_grad[k] += c_neg * y_neg[k];
          target_grads[neg_slots[jn]][k] += c_neg * p.query.e[k];
        }
      }
    }
  }
  if (empty_pairs == pairs.size()) {
    throw TrainError("degenerate batch: every pair has an empty negative set");
  }

  BatchResult out;
  out.loss = loss_sum * inv_pairs;
  for (const Pair& p : pairs) {
    if (!is_zero(p.query_grad)) accumulate_trace_grad(p.query, p.query_grad, out.grads);
  }
  for (std::size_t s = 0; s < targets.size(); ++s) {
    if (!is_zero(target_grads[s])) accumulate_trace_grad(targets[s], target_grads[s], out.grads);
  }
  return out;
}

}  // namespace fedkgc
