#pragma once
// Knowledge-graph data model and TSV ingestion.
//
// On-disk layout per client (LF line endings, no headers, no blank lines):
//   entities.tsv   <entity_id>\t<surface text>     ids 0..N-1 in file order
//   relations.tsv  <relation_id>\t<surface text>
//   train.tsv / valid.tsv / test.tsv   <head_id>\t<relation_id>\t<tail_id>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedkgc/errors.hpp"

namespace fedkgc {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

struct Triple {
  EntityId head;
  RelationId relation;
  EntityId tail;

  bool operator==(const Triple&) const = default;
};

enum class Split { train, valid, test };
constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::valid, Split::test};
const char* split_name(Split s);
Split parse_split(const std::string& name);  // throws ConfigError on unknown name

// One client's private store. Immutable after construction; safe to share
// read-only across threads.
struct KnowledgeGraph {
  std::string client_name;
  std::vector<std::string> entity_text;    // index = EntityId
  std::vector<std::string> relation_text;  // index = RelationId
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  // Undirected adjacency over train triples, deduplicated, self-loops
  // dropped. Neighbor lists sorted ascending.
  std::vector<std::vector<EntityId>> adjacency;

  std::size_t num_entities() const { return entity_text.size(); }
  std::size_t num_relations() const { return relation_text.size(); }
  std::size_t num_triples() const { return train.size() + valid.size() + test.size(); }
  std::size_t undirected_edge_count() const;

  const std::vector<Triple>& triples(Split s) const;

  bool operator==(const KnowledgeGraph&) const = default;
};

// Builds adjacency and validates ranges/duplicates; shared by load_kg and
// the in-memory constructors used in tests and datagen.
KnowledgeGraph make_kg(std::string client_name, std::vector<std::string> entity_text,
                       std::vector<std::string> relation_text, std::vector<Triple> train,
                       std::vector<Triple> valid, std::vector<Triple> test);

KnowledgeGraph load_kg(const std::filesystem::path& dir, const std::string& client_name);
void save_kg(const KnowledgeGraph& g, const std::filesystem::path& dir);

// Entities reachable from start in <= k undirected hops over train
// adjacency, excluding start itself. Sorted ascending.
std::vector<EntityId> k_hop_neighbors(const KnowledgeGraph& g, EntityId start, int k);

// Flag-vector variant for hot paths (one byte per entity, 1 = neighbor).
std::vector<char> k_hop_flags(const KnowledgeGraph& g, EntityId start, int k);

// (head, relation) -> tails and (tail, relation) -> heads over a split
// union, for the filtered ranking protocol.
class KnownTripleIndex {
 public:
  KnownTripleIndex() = default;

  bool contains(EntityId head, RelationId rel, EntityId tail) const;
  // Empty span when the key was never seen.
  std::span<const EntityId> tails(EntityId head, RelationId rel) const;
  std::span<const EntityId> heads(EntityId tail, RelationId rel) const;

  std::size_t num_head_rel_keys() const { return by_head_rel_.size(); }
  std::size_t num_tail_rel_keys() const { return by_tail_rel_.size(); }

 private:
  friend KnownTripleIndex build_filter_index(const KnowledgeGraph&, const std::vector<Split>&);
  static std::uint64_t key(EntityId e, RelationId r) {
    return (static_cast<std::uint64_t>(e) << 32) | r;
  }
  std::unordered_map<std::uint64_t, std::vector<EntityId>> by_head_rel_;
  std::unordered_map<std::uint64_t, std::vector<EntityId>> by_tail_rel_;
};

KnownTripleIndex build_filter_index(const KnowledgeGraph& g, const std::vector<Split>& splits);

}  // namespace fedkgc
