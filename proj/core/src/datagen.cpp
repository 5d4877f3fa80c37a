#include "fedkgc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <unordered_set>

#include "fedkgc/errors.hpp"
#include "fedkgc/rng.hpp"

namespace fedkgc {
namespace {

constexpr const char* kClusterSyl[20] = {"bar", "cen", "dol", "fim", "gor", "hap", "jun",
                                         "kel", "lom", "mur", "nid", "pol", "qek", "rit",
                                         "sag", "tev", "ulm", "vod", "wex", "yal"};
constexpr const char* kEntitySyl[20] = {"ka",  "lo",  "mi",  "ra",  "ze",  "tu",  "ben",
                                        "dor", "fal", "gim", "hul", "jor", "nis", "pek",
                                        "qua", "sol", "vex", "wem", "yat", "bru"};
constexpr const char* kRelationSyl[20] = {"links", "holds", "bound", "flows", "marks",
                                          "joins", "feeds", "leads", "keeps", "spans",
                                          "meets", "lifts", "draws", "sends", "forms",
                                          "bears", "seeks", "finds", "takes", "moves"};

// Unique pseudo-word per index below 20^3.
std::string encode_word(int i, const char* const syl[20]) {
  std::string w = syl[i % 20];
  w += syl[(i / 20) % 20];
  w += syl[(i / 400) % 20];
  return w;
}

std::uint64_t fact_key(const Triple& t) {
  return (static_cast<std::uint64_t>(t.head) << 42) |
         (static_cast<std::uint64_t>(t.relation) << 21) | t.tail;
}

// Entities of a cluster are {c, c + C, c + 2C, ...}.
int cluster_size(int cluster, int entities, int clusters) {
  return (entities - cluster + clusters - 1) / clusters;
}

EntityId cluster_member(int cluster, int clusters, std::uint64_t j) {
  return static_cast<EntityId>(cluster + static_cast<int>(j) * clusters);
}

std::string client_name(int j) { return "c" + std::to_string(j); }

}  // namespace

void validate_gen_config(const GenConfig& cfg) {
  if (cfg.clients < 1) throw ConfigError("gen: clients must be >= 1");
  if (cfg.clusters < 2) throw ConfigError("gen: clusters must be >= 2");
  if (cfg.entities < cfg.clusters) throw ConfigError("gen: entities must be >= clusters");
  if (cfg.entities >= 8000) throw ConfigError("gen: entities must be < 8000");
  if (cfg.relations < cfg.clusters) {
    throw ConfigError("gen: relations must be >= clusters (every cluster needs a source relation)");
  }
  if (2 * cfg.relations >= 8000) throw ConfigError("gen: relations must be < 4000");
  if (cfg.facts < cfg.entities) {
    throw ConfigError("gen: facts must be >= entities to cover every entity");
  }
  if (static_cast<std::size_t>(cfg.clients) != cfg.fractions.size()) {
    throw ConfigError("gen: fractions must list one value per client");
  }
  for (double f : cfg.fractions) {
    if (!(f > 0.0) || f > 1.0) throw ConfigError("gen: fractions must lie in (0, 1]");
  }
  double sum = cfg.train_frac + cfg.valid_frac + cfg.test_frac;
  if (!(cfg.train_frac > 0.0) || !(cfg.valid_frac > 0.0) || !(cfg.test_frac > 0.0) ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("gen: split fractions must be positive and sum to 1");
  }
}

LatentWorld build_world(const GenConfig& cfg) {
  validate_gen_config(cfg);
  LatentWorld world;

  world.entity_text.reserve(cfg.entities);
  world.entity_cluster.reserve(cfg.entities);
  for (int e = 0; e < cfg.entities; ++e) {
    int c = e % cfg.clusters;
    world.entity_cluster.push_back(c);
    world.entity_text.push_back(encode_word(c, kClusterSyl) + " " + encode_word(e, kEntitySyl));
  }
  for (int r = 0; r < cfg.relations; ++r) {
    world.relation_text.push_back(encode_word(r, kRelationSyl) + " " +
                                  encode_word(r + cfg.relations, kRelationSyl));
  }

  // Each relation links a fixed source cluster to a random distinct target.
  std::vector<int> dst(cfg.relations);
  CounterRng dst_rng(derive_key(cfg.seed, "rel_dst"));
  for (int r = 0; r < cfg.relations; ++r) {
    int src = r % cfg.clusters;
    dst[r] = static_cast<int>((src + 1 + dst_rng.next_below(cfg.clusters - 1)) % cfg.clusters);
  }

  std::uint64_t capacity = 0;
  for (int r = 0; r < cfg.relations; ++r) {
    capacity += static_cast<std::uint64_t>(cluster_size(r % cfg.clusters, cfg.entities,
                                                        cfg.clusters)) *
                cluster_size(dst[r], cfg.entities, cfg.clusters);
  }
  if (static_cast<std::uint64_t>(cfg.facts) > capacity) {
    throw ConfigError("gen: facts exceed the " + std::to_string(capacity) +
                      " distinct (head, relation, tail) combinations the clusters allow");
  }

  std::unordered_set<std::uint64_t> seen;
  CounterRng rng(derive_key(cfg.seed, "facts"));
  auto try_add = [&](const Triple& t) {
    if (!seen.insert(fact_key(t)).second) return false;
    world.facts.push_back(t);
    return true;
  };
  auto random_fact_for_relation = [&](int r, EntityId head) {
    int d = dst[r];
    EntityId tail =
        cluster_member(d, cfg.clusters, rng.next_below(cluster_size(d, cfg.entities,
                                                                    cfg.clusters)));
    return Triple{head, static_cast<RelationId>(r), tail};
  };

  // Coverage pass: one fact with each entity as head.
  for (int e = 0; e < cfg.entities; ++e) {
    int c = e % cfg.clusters;
    int src_rel_count = (cfg.relations - c + cfg.clusters - 1) / cfg.clusters;
    bool placed = false;
    for (int tries = 0; tries < 1000 && !placed; ++tries) {
      int r = c + cfg.clusters * static_cast<int>(rng.next_below(src_rel_count));
      placed = try_add(random_fact_for_relation(r, static_cast<EntityId>(e)));
    }
    if (!placed) throw ConfigError("gen: could not place a fact for every entity");
  }
  // Fill pass.
  std::uint64_t tries = 0, max_tries = 50ull * cfg.facts + 1000;
  while (world.facts.size() < static_cast<std::size_t>(cfg.facts)) {
    if (++tries > max_tries) throw ConfigError("gen: fact space too saturated to fill");
    int r = static_cast<int>(rng.next_below(cfg.relations));
    int c = r % cfg.clusters;
    EntityId head =
        cluster_member(c, cfg.clusters, rng.next_below(cluster_size(c, cfg.entities,
                                                                    cfg.clusters)));
    try_add(random_fact_for_relation(r, head));
  }
  return world;
}

namespace {

std::string suffixed(const std::string& text, const std::string& name) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    out += text[i];
    if (text[i] != ' ' && (i + 1 == text.size() || text[i + 1] == ' ')) {
      out += "@" + name;
    }
  }
  return out;
}

KnowledgeGraph build_client_kg(const GenConfig& cfg, const LatentWorld& world,
                               const std::string& name, const std::vector<std::uint32_t>& sample,
                               CounterRng& split_rng) {
  std::size_t n = sample.size();
  auto quota = [&](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frac * n)));
  };
  std::size_t n_test = quota(cfg.test_frac);
  std::size_t n_valid = quota(cfg.valid_frac);
  if (n_test + n_valid + 1 > n) {
    throw ConfigError("gen: client '" + name + "' samples too few facts to cover all splits");
  }

  // Greedy split assignment: a fact may leave train only while its head,
  // tail, and relation each keep at least one other train occurrence.
  std::vector<std::uint32_t> order(sample.begin(), sample.end());
  deterministic_shuffle(order, split_rng);
  std::unordered_map<EntityId, int> e_count;
  std::unordered_map<RelationId, int> r_count;
  for (std::uint32_t f : order) {
    const Triple& t = world.facts[f];
    ++e_count[t.head];
    ++e_count[t.tail];
    ++r_count[t.relation];
  }
  std::unordered_set<std::uint32_t> test_set, valid_set;
  auto movable = [&](const Triple& t) {
    return e_count[t.head] >= 2 && e_count[t.tail] >= 2 && r_count[t.relation] >= 2;
  };
  for (std::uint32_t f : order) {
    if (test_set.size() >= n_test) break;
    const Triple& t = world.facts[f];
    if (!movable(t)) continue;
    test_set.insert(f);
    --e_count[t.head];
    --e_count[t.tail];
    --r_count[t.relation];
  }
  for (std::uint32_t f : order) {
    if (valid_set.size() >= n_valid) break;
    if (test_set.contains(f)) continue;
    const Triple& t = world.facts[f];
    if (!movable(t)) continue;
    valid_set.insert(f);
    --e_count[t.head];
    --e_count[t.tail];
    --r_count[t.relation];
  }
  if (test_set.empty() || valid_set.empty()) {
    throw ConfigError("gen: client '" + name + "' cannot fill valid/test splits");
  }

  // Local id spaces over the entities/relations this client actually uses.
  std::set<EntityId> used_entities;
  std::set<RelationId> used_relations;
  for (std::uint32_t f : sample) {
    const Triple& t = world.facts[f];
    used_entities.insert(t.head);
    used_entities.insert(t.tail);
    used_relations.insert(t.relation);
  }
  std::unordered_map<EntityId, EntityId> e_local;
  std::unordered_map<RelationId, RelationId> r_local;
  std::vector<std::string> entity_text;
  std::vector<std::string> relation_text;
  for (EntityId e : used_entities) {
    e_local.emplace(e, static_cast<EntityId>(entity_text.size()));
    entity_text.push_back(cfg.surface == SurfaceMode::shared ? world.entity_text[e]
                                                             : suffixed(world.entity_text[e], name));
  }
  for (RelationId r : used_relations) {
    r_local.emplace(r, static_cast<RelationId>(relation_text.size()));
    relation_text.push_back(world.relation_text[r]);
  }

  std::vector<Triple> train, valid, test;
  for (std::uint32_t f : sample) {
    const Triple& t = world.facts[f];
    Triple local{e_local.at(t.head), r_local.at(t.relation), e_local.at(t.tail)};
    if (test_set.contains(f)) {
      test.push_back(local);
    } else if (valid_set.contains(f)) {
      valid.push_back(local);
    } else {
      train.push_back(local);
    }
  }
  return make_kg(name, std::move(entity_text), std::move(relation_text), std::move(train),
                 std::move(valid), std::move(test));
}

}  // namespace

std::vector<ClientData> generate_clients(const GenConfig& cfg, const LatentWorld& world) {
  std::vector<ClientData> clients;
  for (int j = 0; j < cfg.clients; ++j) {
    ClientData cd;
    cd.name = client_name(j);
    auto count = static_cast<std::size_t>(std::llround(cfg.fractions[j] * world.facts.size()));
    count = std::min(count, world.facts.size());

    std::vector<std::uint32_t> ids(world.facts.size());
    std::iota(ids.begin(), ids.end(), 0u);
    CounterRng sample_rng(derive_key(cfg.seed, "sample", static_cast<std::uint64_t>(j)));
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t k = i + static_cast<std::size_t>(sample_rng.next_below(ids.size() - i));
      std::swap(ids[i], ids[k]);
    }
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    cd.fact_ids = std::move(ids);

    CounterRng split_rng(derive_key(cfg.seed, "split", static_cast<std::uint64_t>(j)));
    cd.kg = build_client_kg(cfg, world, cd.name, cd.fact_ids, split_rng);
    clients.push_back(std::move(cd));
  }
  return clients;
}

std::vector<std::filesystem::path> generate(const GenConfig& cfg,
                                            const std::filesystem::path& out_dir) {
  LatentWorld world = build_world(cfg);
  std::vector<ClientData> clients = generate_clients(cfg, world);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("gen: cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> dirs;
  nlohmann::json manifest;
  manifest["latent_facts"] = cfg.facts;
  manifest["clients"] = nlohmann::json::array();
  for (const ClientData& cd : clients) {
    auto dir = out_dir / cd.name;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("gen: cannot create '" + dir.string() + "': " + ec.message());
    save_kg(cd.kg, dir);
    manifest["clients"].push_back({{"name", cd.name}, {"fact_ids", cd.fact_ids}});
    dirs.push_back(dir);
  }
  std::ofstream f(out_dir / "world.json", std::ios::binary | std::ios::trunc);
  f << manifest.dump(2) << "\n";
  if (!f) throw DataError("gen: cannot write world.json");
  return dirs;
}

std::vector<OverlapPair> overlap_report(const std::vector<std::filesystem::path>& dirs) {
  if (dirs.size() < 2) throw DataError("overlap report needs at least two client directories");
  struct Surface {
    std::string name;
    std::set<std::string> facts;
    std::set<std::string> entities;
  };
  std::vector<Surface> surfaces;
  for (const auto& dir : dirs) {
    Surface s;
    s.name = dir.filename().string();
    KnowledgeGraph g = load_kg(dir, s.name);
    s.entities.insert(g.entity_text.begin(), g.entity_text.end());
    for (Split sp : kAllSplits) {
      for (const Triple& t : g.triples(sp)) {
        s.facts.insert(g.entity_text[t.head] + "\x1f" + g.relation_text[t.relation] + "\x1f" +
                       g.entity_text[t.tail]);
      }
    }
    surfaces.push_back(std::move(s));
  }

  std::vector<OverlapPair> out;
  for (std::size_t a = 0; a < surfaces.size(); ++a) {
    for (std::size_t b = a + 1; b < surfaces.size(); ++b) {
      OverlapPair p;
      p.a = surfaces[a].name;
      p.b = surfaces[b].name;
      std::vector<std::string> inter;
      std::set_intersection(surfaces[a].facts.begin(), surfaces[a].facts.end(),
                            surfaces[b].facts.begin(), surfaces[b].facts.end(),
                            std::back_inserter(inter));
      p.shared_facts = static_cast<std::int64_t>(inter.size());
      std::vector<std::string> einter;
      std::set_intersection(surfaces[a].entities.begin(), surfaces[a].entities.end(),
                            surfaces[b].entities.begin(), surfaces[b].entities.end(),
                            std::back_inserter(einter));
      p.shared_entities = static_cast<std::int64_t>(einter.size());
      std::size_t uni = surfaces[a].facts.size() + surfaces[b].facts.size() - inter.size();
      p.fact_jaccard = uni == 0 ? 0.0 : static_cast<double>(inter.size()) / uni;
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace fedkgc
