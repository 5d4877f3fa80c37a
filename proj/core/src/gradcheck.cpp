#include "fedkgc/gradcheck.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include "fedkgc/encoder.hpp"
#include "fedkgc/errors.hpp"
#include "fedkgc/kg.hpp"
#include "fedkgc/loss.hpp"
#include "fedkgc/rng.hpp"
#include "fedkgc/tokenizer.hpp"

namespace fedkgc {
namespace {

struct Fixture {
  KnowledgeGraph graph;
  std::vector<Triple> batch;
};

Fixture make_fixture(std::uint64_t seed) {
  CounterRng rng(derive_key(seed, "gradcheck"));
  const int n_ent = 6;
  std::vector<std::string> entity_text;
  for (int e = 0; e < n_ent; ++e) {
    entity_text.push_back("w" + std::to_string(rng.next_below(40)) + " w" +
                          std::to_string(rng.next_below(40)));
  }
  std::vector<std::string> relation_text = {"near", "above"};

  std::vector<Triple> triples;
  while (true) {
    triples.clear();
    std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
    std::set<EntityId> heads, tails;
    while (triples.size() < 4) {
      auto h = static_cast<EntityId>(rng.next_below(n_ent));
      auto t = static_cast<EntityId>(rng.next_below(n_ent));
      auto r = static_cast<RelationId>(rng.next_below(2));
      if (!seen.insert({h, r, t}).second) continue;
      triples.push_back({h, r, t});
      heads.insert(h);
      tails.insert(t);
    }
    if (heads.size() >= 2 && tails.size() >= 2) break;
  }
  Fixture fx;
  fx.graph = make_kg("gradcheck", entity_text, relation_text, triples, {}, {});
  fx.batch = triples;
  return fx;
}

double eval_loss(const ModelWeights& w, const KnowledgeGraph& g,
                 const std::vector<Triple>& batch, const Tokenizer& tk,
                 const EncoderConfig& enc, const TrainConfig& cfg) {
  ModelWeights copy = w;
  return batch_loss(copy, g, batch, tk, enc, cfg).loss;
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckOptions& opt) {
  if (opt.eps <= 0.0) throw ConfigError("gradcheck eps must be > 0");
  if (opt.seeds < 1) throw ConfigError("gradcheck needs at least one seed");

  EncoderConfig enc;
  enc.dim = 8;
  enc.rel_prefix_len = 2;
  enc.relation_mode = RelationMode::parameterized;
  enc.tokenizer.buckets = 32;
  TrainConfig cfg;
  cfg.batch_size = 4;
  // The training temperature (0.05) curves the loss sharply enough that the
  // central difference's own O(eps^2) truncation error (~2e-5 relative at
  // eps = 1e-4, scaling verified as eps^2) exceeds the tolerance. The
  // gradient code is identical for every tau/gamma, so the check runs where
  // the finite-difference oracle is itself accurate.
  cfg.temperature = 0.5;
  cfg.margin = 0.1;
  Tokenizer tk(enc.tokenizer);

  GradCheckReport report;
  // Roundoff in the central difference grows as eps shrinks; relax the
  // relative bound accordingly (1e-5 at the default eps = 1e-4).
  report.rel_tolerance = std::max(1e-5, 1e-9 / opt.eps);
  report.pass = true;
  for (int s = 0; s < opt.seeds; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    Fixture fx = make_fixture(seed);
    ModelWeights w = init_weights(enc, fx.graph.relation_text, seed);
    // The loss only sees normalized embeddings, so inflating the weights
    // leaves it invariant while flattening the curvature along each
    // coordinate (f'''/f' drops with the square of the scale) -- the other
    // half of keeping the finite-difference truncation error in bounds.
    for (auto& [name, tensor] : w) {
      for (double& x : tensor.data) x *= 4.0;
    }
    BatchResult analytic = batch_loss(w, fx.graph, fx.batch, tk, enc, cfg);

    if (opt.corrupt && !analytic.grads.empty()) {
      auto& first = analytic.grads.begin()->second;
      if (!first.rows.empty()) first.rows.begin()->second[0] += 1e-3;
    }

    GradCheckSeedResult res;
    res.seed = seed;
    double worst_score = -1.0;
    for (auto& [name, tensor] : w) {
      const SparseGrad* grad = nullptr;
      if (auto it = analytic.grads.find(name); it != analytic.grads.end()) grad = &it->second;
      for (std::uint32_t r = 0; r < static_cast<std::uint32_t>(tensor.rows); ++r) {
        const std::vector<double>* grow = nullptr;
        if (grad != nullptr) {
          if (auto it = grad->rows.find(r); it != grad->rows.end()) grow = &it->second;
        }
        for (int c = 0; c < tensor.cols; ++c) {
          double& coord = tensor.at(static_cast<int>(r), c);
          const double saved = coord;
          coord = saved + opt.eps;
          const double up = eval_loss(w, fx.graph, fx.batch, tk, enc, cfg);
          coord = saved - opt.eps;
          const double down = eval_loss(w, fx.graph, fx.batch, tk, enc, cfg);
          coord = saved;

          const double fd = (up - down) / (2.0 * opt.eps);
          const double a = grow != nullptr ? (*grow)[static_cast<std::size_t>(c)] : 0.0;
          const double diff = std::abs(a - fd);
          const double denom = std::max(std::abs(a), std::abs(fd));
          double score;
          if (denom >= 1e-6) {
            const double rel = diff / denom;
            res.max_rel_err = std::max(res.max_rel_err, rel);
            score = rel / report.rel_tolerance;
          } else {
            res.max_abs_err = std::max(res.max_abs_err, diff);
            score = diff / report.abs_tolerance;
          }
          if (score > worst_score) {
            worst_score = score;
            res.worst_param = name;
            res.worst_row = r;
            res.worst_col = c;
          }
        }
      }
    }
    res.pass = res.max_rel_err <= report.rel_tolerance && res.max_abs_err <= report.abs_tolerance;
    report.max_rel_err = std::max(report.max_rel_err, res.max_rel_err);
    report.pass = report.pass && res.pass;
    report.seeds.push_back(std::move(res));
  }
  return report;
}

}  // namespace fedkgc
