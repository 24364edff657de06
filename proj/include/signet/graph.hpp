/*
 * Copyright 2026 The Signet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "signet/error.hpp"

namespace signet {

enum class NodeKind : std::uint8_t { kChemical = 0, kGene = 1 };

enum class RelationType : std::uint8_t {
  kIncrease = 0,
  kDecrease = 1,
  kBinding = 2,
  kAffect = 3,
};

inline constexpr std::size_t kNumRelations = 4;
inline constexpr std::array<RelationType, kNumRelations> kAllRelations = {
    RelationType::kIncrease, RelationType::kDecrease, RelationType::kBinding,
    RelationType::kAffect};

enum class Polarity : std::uint8_t { kPositive, kNegative, kNone };

// Homogeneous subgraphs: chemical-chemical and gene-gene interaction edges.
enum class Subgraph : std::uint8_t { kChemical = 0, kGene = 1 };

constexpr Polarity polarity(RelationType r) {
  switch (r) {
    case RelationType::kIncrease:
      return Polarity::kPositive;
    case RelationType::kDecrease:
      return Polarity::kNegative;
    default:
      return Polarity::kNone;
  }
}

constexpr bool is_polar(RelationType r) { return polarity(r) != Polarity::kNone; }

// Increase <-> Decrease. Non-polar relations have no opposite.
constexpr std::optional<RelationType> opposite(RelationType r) {
  switch (r) {
    case RelationType::kIncrease:
      return RelationType::kDecrease;
    case RelationType::kDecrease:
      return RelationType::kIncrease;
    default:
      return std::nullopt;
  }
}

constexpr std::size_t index_of(RelationType r) { return static_cast<std::size_t>(r); }

inline std::string_view to_string(RelationType r) {
  switch (r) {
    case RelationType::kIncrease:
      return "increase";
    case RelationType::kDecrease:
      return "decrease";
    case RelationType::kBinding:
      return "binding";
    case RelationType::kAffect:
      return "affect";
  }
  return "?";
}

inline std::string_view to_string(NodeKind k) {
  return k == NodeKind::kChemical ? "chemical" : "gene";
}

inline std::string_view to_string(Subgraph s) {
  return s == Subgraph::kChemical ? "chem_chem" : "gene_gene";
}

inline std::optional<RelationType> parse_relation(std::string_view s) {
  for (RelationType r : kAllRelations) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

// A chemical-gene edge. `head` indexes chemicals and `tail` indexes genes.
struct Triplet {
  std::uint32_t head = 0;
  RelationType relation = RelationType::kIncrease;
  std::uint32_t tail = 0;

  static constexpr NodeKind head_kind() { return NodeKind::kChemical; }
  static constexpr NodeKind tail_kind() { return NodeKind::kGene; }

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

struct TripletHash {
  std::size_t operator()(const Triplet& t) const noexcept {
    std::uint64_t k = (static_cast<std::uint64_t>(t.head) << 34) ^
                      (static_cast<std::uint64_t>(t.tail) << 2) ^
                      static_cast<std::uint64_t>(t.relation);
    return std::hash<std::uint64_t>{}(k);
  }
};

// Undirected edge inside one homogeneous subgraph; stored with a <= b.
struct UndirectedEdge {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  friend bool operator==(const UndirectedEdge&, const UndirectedEdge&) = default;
  friend auto operator<=>(const UndirectedEdge&, const UndirectedEdge&) = default;
};

// Compressed adjacency over the global node index space.
struct Adjacency {
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> targets;

  std::span<const std::uint32_t> neighbors(std::uint32_t node) const {
    return {targets.data() + offsets[node], targets.data() + offsets[node + 1]};
  }
  std::uint32_t degree(std::uint32_t node) const {
    return offsets[node + 1] - offsets[node];
  }

  static Adjacency build(std::size_t n_nodes,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& arcs) {
    Adjacency adj;
    adj.offsets.assign(n_nodes + 1, 0);
    for (const auto& [src, dst] : arcs) ++adj.offsets[src + 1];
    for (std::size_t i = 0; i < n_nodes; ++i) adj.offsets[i + 1] += adj.offsets[i];
    adj.targets.resize(arcs.size());
    std::vector<std::uint32_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& [src, dst] : arcs) adj.targets[cursor[src]++] = dst;
    return adj;
  }
};

struct IngestSummary {
  std::size_t chemicals = 0;
  std::size_t genes = 0;
  std::array<std::size_t, kNumRelations> relation_edges{};
  std::array<std::size_t, 2> subgraph_edges{};
  std::size_t duplicates_collapsed = 0;
};

class GraphBuilder;

// Typed chemical/gene graph. Immutable once built.
//
// Nodes live in one global index space: chemicals occupy [0, n_chem) and
// genes [n_chem, n_chem + n_gene). Every edge is indexed in both directions
// so neighbor enumeration is O(degree).
class HeteroGraph {
 public:
  HeteroGraph() = default;

  std::size_t num_chemicals() const { return chem_names_.size(); }
  std::size_t num_genes() const { return gene_names_.size(); }
  std::size_t num_nodes() const { return num_chemicals() + num_genes(); }
  std::size_t count(NodeKind k) const {
    return k == NodeKind::kChemical ? num_chemicals() : num_genes();
  }

  std::uint32_t global(NodeKind k, std::uint32_t index) const {
    return k == NodeKind::kChemical ? index
                                    : static_cast<std::uint32_t>(num_chemicals() + index);
  }
  std::uint32_t chemical_node(std::uint32_t chem) const { return chem; }
  std::uint32_t gene_node(std::uint32_t gene) const {
    return static_cast<std::uint32_t>(num_chemicals() + gene);
  }

  const std::vector<std::string>& names(NodeKind k) const {
    return k == NodeKind::kChemical ? chem_names_ : gene_names_;
  }

  const std::vector<Triplet>& edges(RelationType r) const { return edges_[index_of(r)]; }
  const std::vector<UndirectedEdge>& subgraph_edges(Subgraph s) const {
    return homo_[static_cast<std::size_t>(s)];
  }

  // All chemical-gene edges, relation-major in insertion order.
  std::vector<Triplet> all_edges() const {
    std::vector<Triplet> out;
    out.reserve(num_edges());
    for (const auto& list : edges_) out.insert(out.end(), list.begin(), list.end());
    return out;
  }

  std::size_t num_edges() const {
    std::size_t n = 0;
    for (const auto& list : edges_) n += list.size();
    return n;
  }

  bool has_edge(const Triplet& t) const { return edge_set_.contains(t); }

  std::span<const std::uint32_t> neighbors(RelationType r, std::uint32_t node) const {
    return rel_adj_[index_of(r)].neighbors(node);
  }
  std::uint32_t degree(RelationType r, std::uint32_t node) const {
    return rel_adj_[index_of(r)].degree(node);
  }
  std::span<const std::uint32_t> neighbors(Subgraph s, std::uint32_t node) const {
    return homo_adj_[static_cast<std::size_t>(s)].neighbors(node);
  }
  std::uint32_t degree(Subgraph s, std::uint32_t node) const {
    return homo_adj_[static_cast<std::size_t>(s)].degree(node);
  }

  IngestSummary summary() const {
    IngestSummary s;
    s.chemicals = num_chemicals();
    s.genes = num_genes();
    for (RelationType r : kAllRelations) s.relation_edges[index_of(r)] = edges(r).size();
    s.subgraph_edges = {homo_[0].size(), homo_[1].size()};
    s.duplicates_collapsed = duplicates_collapsed_;
    return s;
  }

  // Same nodes and homogeneous edges, chemical-gene edges replaced by `edges`.
  // Used to build the message-passing graph from the training split.
  HeteroGraph with_relation_edges(std::span<const Triplet> edges) const;

 private:
  friend class GraphBuilder;

  void index();

  std::vector<std::string> chem_names_;
  std::vector<std::string> gene_names_;
  std::array<std::vector<Triplet>, kNumRelations> edges_;
  std::array<std::vector<UndirectedEdge>, 2> homo_;
  std::unordered_set<Triplet, TripletHash> edge_set_;
  std::array<Adjacency, kNumRelations> rel_adj_;
  std::array<Adjacency, 2> homo_adj_;
  std::size_t duplicates_collapsed_ = 0;
};

class GraphBuilder {
 public:
  GraphBuilder() = default;
  GraphBuilder(std::size_t n_chem, std::size_t n_gene) {
    for (std::size_t i = 0; i < n_chem; ++i) add_node("c" + std::to_string(i), NodeKind::kChemical);
    for (std::size_t i = 0; i < n_gene; ++i) add_node("g" + std::to_string(i), NodeKind::kGene);
  }

  // Returns the dense index of the node within its kind. Re-adding an
  // existing id with the same kind is a no-op.
  std::uint32_t add_node(const std::string& id, NodeKind kind) {
    if (auto it = ids_.find(id); it != ids_.end()) {
      if (it->second.first != kind) {
        throw SchemaError("node '" + id + "' declared as both chemical and gene");
      }
      return it->second.second;
    }
    auto& names = kind == NodeKind::kChemical ? g_.chem_names_ : g_.gene_names_;
    auto idx = static_cast<std::uint32_t>(names.size());
    names.push_back(id);
    ids_.emplace(id, std::make_pair(kind, idx));
    return idx;
  }

  std::optional<std::pair<NodeKind, std::uint32_t>> find(const std::string& id) const {
    if (auto it = ids_.find(id); it != ids_.end()) return it->second;
    return std::nullopt;
  }

  // Returns false when the edge was already present.
  bool add_edge(const Triplet& t) {
    check_range(t.head, NodeKind::kChemical);
    check_range(t.tail, NodeKind::kGene);
    if (!g_.edge_set_.insert(t).second) {
      ++g_.duplicates_collapsed_;
      return false;
    }
    g_.edges_[index_of(t.relation)].push_back(t);
    return true;
  }

  bool add_subgraph_edge(Subgraph s, std::uint32_t a, std::uint32_t b) {
    NodeKind kind = s == Subgraph::kChemical ? NodeKind::kChemical : NodeKind::kGene;
    check_range(a, kind);
    check_range(b, kind);
    UndirectedEdge e{std::min(a, b), std::max(a, b)};
    auto& seen = homo_seen_[static_cast<std::size_t>(s)];
    std::uint64_t key = (static_cast<std::uint64_t>(e.a) << 32) | e.b;
    if (!seen.insert(key).second) {
      ++g_.duplicates_collapsed_;
      return false;
    }
    g_.homo_[static_cast<std::size_t>(s)].push_back(e);
    return true;
  }

  HeteroGraph build() && {
    g_.index();
    return std::move(g_);
  }

 private:
  void check_range(std::uint32_t idx, NodeKind kind) const {
    if (idx >= g_.count(kind)) {
      throw ReferentialError(std::string(to_string(kind)) + " index " + std::to_string(idx) +
                             " out of range");
    }
  }

  HeteroGraph g_;
  std::unordered_map<std::string, std::pair<NodeKind, std::uint32_t>> ids_;
  std::array<std::unordered_set<std::uint64_t>, 2> homo_seen_;
};

inline void HeteroGraph::index() {
  const std::size_t n = num_nodes();
  for (RelationType r : kAllRelations) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    arcs.reserve(2 * edges(r).size());
    for (const Triplet& t : edges(r)) {
      arcs.emplace_back(chemical_node(t.head), gene_node(t.tail));
      arcs.emplace_back(gene_node(t.tail), chemical_node(t.head));
    }
    rel_adj_[index_of(r)] = Adjacency::build(n, arcs);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    NodeKind kind = s == 0 ? NodeKind::kChemical : NodeKind::kGene;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
    for (const UndirectedEdge& e : homo_[s]) {
      arcs.emplace_back(global(kind, e.a), global(kind, e.b));
      if (e.a != e.b) arcs.emplace_back(global(kind, e.b), global(kind, e.a));
    }
    homo_adj_[s] = Adjacency::build(n, arcs);
  }
}

inline HeteroGraph HeteroGraph::with_relation_edges(std::span<const Triplet> edges) const {
  HeteroGraph g;
  g.chem_names_ = chem_names_;
  g.gene_names_ = gene_names_;
  g.homo_ = homo_;
  for (const Triplet& t : edges) {
    if (g.edge_set_.insert(t).second) g.edges_[index_of(t.relation)].push_back(t);
  }
  g.index();
  return g;
}

namespace detail {

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    out.emplace_back(line.substr(start, tab == std::string_view::npos ? line.npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Calls fn(line_number, fields) for every non-comment, non-blank line.
template <typename Fn>
void for_each_tsv_row(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    fn(lineno, split_tabs(line));
  }
}

}  // namespace detail

// Reads `node_id<TAB>kind` and `head_id<TAB>relation<TAB>tail_id` files.
inline HeteroGraph ingest_tsv(const std::string& nodes_path, const std::string& edges_path) {
  GraphBuilder builder;
  detail::for_each_tsv_row(nodes_path, [&](std::size_t lineno, const auto& f) {
    if (f.size() != 2) throw ParseError("expected 2 columns (node_id, kind)", lineno);
    std::string kind = detail::lower(f[1]);
    if (kind == "chemical") {
      builder.add_node(f[0], NodeKind::kChemical);
    } else if (kind == "gene") {
      builder.add_node(f[0], NodeKind::kGene);
    } else {
      throw ParseError("unknown node kind '" + f[1] + "'", lineno);
    }
  });

  struct PendingEdge {
    std::size_t line;
    std::string head, label, tail;
  };
  std::vector<PendingEdge> pending;
  detail::for_each_tsv_row(edges_path, [&](std::size_t lineno, const auto& f) {
    if (f.size() != 3) throw ParseError("expected 3 columns (head_id, relation, tail_id)", lineno);
    pending.push_back({lineno, f[0], detail::lower(f[1]), f[2]});
  });

  for (const PendingEdge& e : pending) {
    auto head = builder.find(e.head);
    auto tail = builder.find(e.tail);
    std::optional<RelationType> rel = parse_relation(e.label);
    if (!rel && e.label != "chem_chem" && e.label != "gene_gene") {
      throw ParseError("unknown relation '" + e.label + "'", e.line);
    }
    if (!head) throw ReferentialError("line " + std::to_string(e.line) + ": unknown node '" + e.head + "'");
    if (!tail) throw ReferentialError("line " + std::to_string(e.line) + ": unknown node '" + e.tail + "'");
    auto kind_error = [&](std::string_view need) {
      return SchemaError("line " + std::to_string(e.line) + ": relation '" + e.label +
                         "' requires " + std::string(need));
    };
    if (rel) {
      if (head->first != NodeKind::kChemical || tail->first != NodeKind::kGene) {
        throw kind_error("a chemical head and a gene tail");
      }
      builder.add_edge({head->second, *rel, tail->second});
    } else if (e.label == "chem_chem") {
      if (head->first != NodeKind::kChemical || tail->first != NodeKind::kChemical) {
        throw kind_error("chemical endpoints");
      }
      builder.add_subgraph_edge(Subgraph::kChemical, head->second, tail->second);
    } else {
      if (head->first != NodeKind::kGene || tail->first != NodeKind::kGene) {
        throw kind_error("gene endpoints");
      }
      builder.add_subgraph_edge(Subgraph::kGene, head->second, tail->second);
    }
  }
  return std::move(builder).build();
}

// Writes the graph back out in the ingestion format.
inline void write_tsv(const HeteroGraph& g, const std::string& nodes_path,
                      const std::string& edges_path) {
  std::ofstream nodes(nodes_path, std::ios::binary);
  std::ofstream edges(edges_path, std::ios::binary);
  if (!nodes || !edges) throw IoError("cannot write graph to '" + nodes_path + "'");
  nodes << "# node_id\tkind\n";
  for (NodeKind k : {NodeKind::kChemical, NodeKind::kGene}) {
    for (const auto& name : g.names(k)) nodes << name << '\t' << to_string(k) << '\n';
  }
  edges << "# head_id\trelation\ttail_id\n";
  const auto& chem = g.names(NodeKind::kChemical);
  const auto& gene = g.names(NodeKind::kGene);
  for (RelationType r : kAllRelations) {
    for (const Triplet& t : g.edges(r)) {
      edges << chem[t.head] << '\t' << to_string(r) << '\t' << gene[t.tail] << '\n';
    }
  }
  for (const auto& e : g.subgraph_edges(Subgraph::kChemical)) {
    edges << chem[e.a] << "\tchem_chem\t" << chem[e.b] << '\n';
  }
  for (const auto& e : g.subgraph_edges(Subgraph::kGene)) {
    edges << gene[e.a] << "\tgene_gene\t" << gene[e.b] << '\n';
  }
  if (!nodes || !edges) throw IoError("write failed for '" + edges_path + "'");
}

}  // namespace signet
