#include "fedkgc/kg.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <tuple>

namespace fedkgc {
namespace {

struct Line {
  std::size_t number;  // 1-based
  std::vector<std::string> fields;
};

std::vector<Line> read_tsv(const std::filesystem::path& path, std::size_t columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError(LoadError::Kind::missing_file, path.string(), 0, "cannot open file");
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<Line> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    bool last = nl == std::string::npos;
    std::string_view line(content.data() + pos, (last ? content.size() : nl) - pos);
    pos = last ? content.size() + 1 : nl + 1;
    if (last && line.empty()) break;  // trailing newline, not a blank line
    ++line_no;
    if (line.empty()) {
      throw LoadError(LoadError::Kind::malformed_line, path.string(), line_no, "blank line");
    }
    if (line.back() == '\r') {
      throw LoadError(LoadError::Kind::malformed_line, path.string(), line_no,
                      "CRLF line ending; expected LF");
    }
    Line out{line_no, {}};
    std::size_t f = 0;
    while (true) {
      std::size_t tab = line.find('\t', f);
      if (tab == std::string_view::npos) {
        out.fields.emplace_back(line.substr(f));
        break;
      }
      out.fields.emplace_back(line.substr(f, tab - f));
      f = tab + 1;
    }
    if (out.fields.size() != columns) {
      throw LoadError(LoadError::Kind::malformed_line, path.string(), line_no,
                      "expected " + std::to_string(columns) + " tab-separated columns, got " +
                          std::to_string(out.fields.size()));
    }
    lines.push_back(std::move(out));
  }
  return lines;
}

std::uint32_t parse_id(const std::string& s, const std::filesystem::path& path,
                       std::size_t line_no) {
  std::uint32_t v = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw LoadError(LoadError::Kind::malformed_line, path.string(), line_no,
                    "not a non-negative integer id: '" + s + "'");
  }
  return v;
}

std::vector<std::string> load_vocab_file(const std::filesystem::path& path) {
  auto lines = read_tsv(path, 2);
  std::vector<std::string> texts;
  texts.reserve(lines.size());
  for (const auto& line : lines) {
    std::uint32_t id = parse_id(line.fields[0], path, line.number);
    if (id != texts.size()) {
      throw LoadError(LoadError::Kind::non_contiguous_id, path.string(), line.number,
                      "ids must be contiguous from 0 in file order; expected " +
                          std::to_string(texts.size()) + ", got " + std::to_string(id));
    }
    texts.push_back(line.fields[1]);
  }
  return texts;
}

std::vector<Triple> load_triples(const std::filesystem::path& path, std::size_t n_entities,
                                 std::size_t n_relations,
                                 std::set<std::tuple<EntityId, RelationId, EntityId>>& seen) {
  auto lines = read_tsv(path, 3);
  std::vector<Triple> triples;
  triples.reserve(lines.size());
  for (const auto& line : lines) {
    Triple t{parse_id(line.fields[0], path, line.number),
             parse_id(line.fields[1], path, line.number),
             parse_id(line.fields[2], path, line.number)};
    if (t.head >= n_entities || t.tail >= n_entities) {
      throw LoadError(LoadError::Kind::id_out_of_range, path.string(), line.number,
                      "entity id out of range (graph has " + std::to_string(n_entities) +
                          " entities)");
    }
    if (t.relation >= n_relations) {
      throw LoadError(LoadError::Kind::id_out_of_range, path.string(), line.number,
                      "relation id out of range (graph has " + std::to_string(n_relations) +
                          " relations)");
    }
    if (!seen.insert({t.head, t.relation, t.tail}).second) {
      throw LoadError(LoadError::Kind::duplicate_triple, path.string(), line.number,
                      "duplicate triple (splits must be disjoint; duplicates within a split "
                      "are rejected)");
    }
    triples.push_back(t);
  }
  return triples;
}

std::vector<std::vector<EntityId>> build_adjacency(std::size_t n_entities,
                                                   const std::vector<Triple>& train) {
  std::vector<std::vector<EntityId>> adj(n_entities);
  for (const Triple& t : train) {
    if (t.head == t.tail) continue;
    adj[t.head].push_back(t.tail);
    adj[t.tail].push_back(t.head);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  for (Split s : kAllSplits) {
    if (name == split_name(s)) return s;
  }
  throw ConfigError("unknown split name: '" + name + "' (expected train, valid, or test)");
}

std::size_t KnowledgeGraph::undirected_edge_count() const {
  std::size_t total = 0;
  for (const auto& nbrs : adjacency) total += nbrs.size();
  return total / 2;
}

const std::vector<Triple>& KnowledgeGraph::triples(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::valid: return valid;
    case Split::test: return test;
  }
  return train;
}

KnowledgeGraph make_kg(std::string client_name, std::vector<std::string> entity_text,
                       std::vector<std::string> relation_text, std::vector<Triple> train,
                       std::vector<Triple> valid, std::vector<Triple> test) {
  KnowledgeGraph g;
  g.client_name = std::move(client_name);
  g.entity_text = std::move(entity_text);
  g.relation_text = std::move(relation_text);
  g.train = std::move(train);
  g.valid = std::move(valid);
  g.test = std::move(test);

  std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
  for (Split s : kAllSplits) {
    for (const Triple& t : g.triples(s)) {
      if (t.head >= g.num_entities() || t.tail >= g.num_entities() ||
          t.relation >= g.num_relations()) {
        throw DataError("triple references an id outside the graph's range");
      }
      if (!seen.insert({t.head, t.relation, t.tail}).second) {
        throw DataError("duplicate triple across or within splits");
      }
    }
  }
  if (g.train.empty()) {
    throw DataError("empty train split");
  }
  g.adjacency = build_adjacency(g.num_entities(), g.train);
  return g;
}

KnowledgeGraph load_kg(const std::filesystem::path& dir, const std::string& client_name) {
  KnowledgeGraph g;
  g.client_name = client_name;
  g.entity_text = load_vocab_file(dir / "entities.tsv");
  g.relation_text = load_vocab_file(dir / "relations.tsv");

  std::set<std::tuple<EntityId, RelationId, EntityId>> seen;
  g.train = load_triples(dir / "train.tsv", g.num_entities(), g.num_relations(), seen);
  g.valid = load_triples(dir / "valid.tsv", g.num_entities(), g.num_relations(), seen);
  g.test = load_triples(dir / "test.tsv", g.num_entities(), g.num_relations(), seen);

  if (g.train.empty()) {
    throw LoadError(LoadError::Kind::empty_split, (dir / "train.tsv").string(), 0,
                    "empty split: train has no triples");
  }
  g.adjacency = build_adjacency(g.num_entities(), g.train);
  return g;
}

void save_kg(const KnowledgeGraph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write_vocab = [&](const char* file, const std::vector<std::string>& texts) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / file).string());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      out << i << '\t' << texts[i] << '\n';
    }
  };
  auto write_triples = [&](const char* file, const std::vector<Triple>& triples) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / file).string());
    for (const Triple& t : triples) {
      out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
    }
  };
  write_vocab("entities.tsv", g.entity_text);
  write_vocab("relations.tsv", g.relation_text);
  write_triples("train.tsv", g.train);
  write_triples("valid.tsv", g.valid);
  write_triples("test.tsv", g.test);
}

std::vector<char> k_hop_flags(const KnowledgeGraph& g, EntityId start, int k) {
  if (start >= g.num_entities()) {
    throw std::invalid_argument("k_hop_neighbors: entity id " + std::to_string(start) +
                                " out of range");
  }
  if (k < 1) {
    throw std::invalid_argument("k_hop_neighbors: hop count must be >= 1");
  }
  std::vector<char> visited(g.num_entities(), 0);
  visited[start] = 1;
  std::vector<EntityId> frontier{start};
  std::vector<EntityId> next;
  for (int depth = 0; depth < k && !frontier.empty(); ++depth) {
    next.clear();
    for (EntityId e : frontier) {
      for (EntityId n : g.adjacency[e]) {
        if (!visited[n]) {
          visited[n] = 1;
          next.push_back(n);
        }
      }
    }
    frontier.swap(next);
  }
  visited[start] = 0;  // the start entity is not its own neighbor
  return visited;
}

std::vector<EntityId> k_hop_neighbors(const KnowledgeGraph& g, EntityId start, int k) {
  std::vector<char> flags = k_hop_flags(g, start, k);
  std::vector<EntityId> out;
  for (EntityId e = 0; e < flags.size(); ++e) {
    if (flags[e]) out.push_back(e);
  }
  return out;
}

bool KnownTripleIndex::contains(EntityId head, RelationId rel, EntityId tail) const {
  auto it = by_head_rel_.find(key(head, rel));
  if (it == by_head_rel_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), tail);
}

std::span<const EntityId> KnownTripleIndex::tails(EntityId head, RelationId rel) const {
  auto it = by_head_rel_.find(key(head, rel));
  if (it == by_head_rel_.end()) return {};
  return it->second;
}

std::span<const EntityId> KnownTripleIndex::heads(EntityId tail, RelationId rel) const {
  auto it = by_tail_rel_.find(key(tail, rel));
  if (it == by_tail_rel_.end()) return {};
  return it->second;
}

KnownTripleIndex build_filter_index(const KnowledgeGraph& g, const std::vector<Split>& splits) {
  if (splits.empty()) {
    throw std::invalid_argument("build_filter_index: split selection must be nonempty");
  }
  KnownTripleIndex idx;
  for (Split s : splits) {
    for (const Triple& t : g.triples(s)) {
      idx.by_head_rel_[KnownTripleIndex::key(t.head, t.relation)].push_back(t.tail);
      idx.by_tail_rel_[KnownTripleIndex::key(t.tail, t.relation)].push_back(t.head);
    }
  }
  for (auto& [k, v] : idx.by_head_rel_) std::sort(v.begin(), v.end());
  for (auto& [k, v] : idx.by_tail_rel_) std::sort(v.begin(), v.end());
  return idx;
}

}  // namespace fedkgc
