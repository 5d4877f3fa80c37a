#pragma once
// Synthetic multi-client KG generator. One latent world (clustered entities,
// relations linking cluster pairs) is sampled independently per client, so
// clients hold overlapping fact subsets; surface modes control whether
// entity strings are shared across clients or suffixed per client.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedkgc/kg.hpp"

namespace fedkgc {

enum class SurfaceMode { shared, distinct };

struct GenConfig {
  int clients = 3;
  int entities = 500;   // latent entities N
  int relations = 20;   // latent relations R
  int facts = 6000;     // latent facts F
  int clusters = 10;    // entity clusters; each relation links two clusters
  std::vector<double> fractions = {0.5, 0.3, 0.1};  // per-client fact sample
  SurfaceMode surface = SurfaceMode::shared;
  double train_frac = 0.8;
  double valid_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;
};

// Throws ConfigError on invalid or infeasible parameters.
void validate_gen_config(const GenConfig& cfg);

struct LatentWorld {
  std::vector<std::string> entity_text;  // cluster head word + unique word
  std::vector<int> entity_cluster;
  std::vector<std::string> relation_text;
  std::vector<Triple> facts;  // unique; every entity appears in >= 1 fact
};

LatentWorld build_world(const GenConfig& cfg);

// Per-client latent fact sample plus the in-memory KG built from it.
struct ClientData {
  std::string name;
  std::vector<std::uint32_t> fact_ids;  // latent fact indices, ascending
  KnowledgeGraph kg;
};

std::vector<ClientData> generate_clients(const GenConfig& cfg, const LatentWorld& world);

// Builds the world, samples every client, writes out_dir/<name>/ in the
// kg-core TSV format plus out_dir/world.json (latent fact ids per client).
// Returns the client directories in client order.
std::vector<std::filesystem::path> generate(const GenConfig& cfg,
                                            const std::filesystem::path& out_dir);

struct OverlapPair {
  std::string a;
  std::string b;
  std::int64_t shared_facts = 0;     // identical (head, relation, tail) surface triples
  std::int64_t shared_entities = 0;  // identical entity strings
  double fact_jaccard = 0.0;
};

// Pairwise surface-resolved overlap between client directories.
// Throws DataError when fewer than two directories are given.
std::vector<OverlapPair> overlap_report(const std::vector<std::filesystem::path>& dirs);

}  // namespace fedkgc
