#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cthge/csr.hpp"
#include "cthge/matrix.hpp"

namespace cthge {

using NodeId = std::int64_t;      // external id as written in files
using NodeIndex = std::uint32_t;  // internal index, canonical (sorted by id)
using EdgeId = std::uint32_t;     // index into the canonical edge array
using TypeId = std::uint16_t;

enum class SplitTag : std::uint8_t { kNone = 0, kTrain, kVal, kTest };

constexpr int kNoLabel = -1;

struct Edge {
  NodeIndex u = 0;  // u <= v; undirected edges stored once
  NodeIndex v = 0;
  TypeId type = 0;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

struct EdgePartition {
  std::vector<EdgeId> tt;  // target-target
  std::vector<EdgeId> tn;  // cross-type
  std::vector<EdgeId> nn;  // non-target-non-target
};

// Sparse cross-type adjacency in both orientations plus the index maps
// between node indices and target/non-target ordinals. a_tn is the
// exact transpose of a_nt.
struct CrossTypeView {
  Csr a_nt;  // n_n x n_t, values are edge weights
  Csr a_tn;  // n_t x n_n
  std::vector<EdgeId> e_tn;
  std::size_t n_t = 0;
  std::size_t n_n = 0;
  std::vector<std::int32_t> target_ordinal;     // node index -> ordinal or -1
  std::vector<std::int32_t> nontarget_ordinal;  // node index -> ordinal or -1
  std::vector<NodeIndex> target_nodes;          // ordinal -> node index
  std::vector<NodeIndex> nontarget_nodes;
};

// Immutable typed graph. Nodes are held in canonical order (ascending
// external id); edges are held in canonical order (endpoint ids, then
// edge type name, then weight), so logically identical graphs loaded
// from reordered files compare and serialize identically.
class HeteroGraph {
 public:
  struct Parts {
    std::vector<NodeId> node_ids;
    std::vector<TypeId> node_types;           // parallel to node_ids
    std::vector<std::string> node_type_names;
    std::vector<std::string> edge_type_names;
    std::vector<Edge> edges;                  // endpoints as indices into node_ids
    std::string target_type_name;
    std::optional<Matrix> features;           // rows parallel to node_ids
    std::vector<int> labels;                  // kNoLabel when absent
    std::vector<SplitTag> splits;
  };

  static HeteroGraph load(const std::string& nodes_path, const std::string& edges_path,
                          const std::string& target_type_name);
  // Canonicalizes and validates raw parts; used by the generator and
  // the editor.
  static HeteroGraph from_parts(Parts parts);

  void save(const std::string& nodes_path, const std::string& edges_path) const;
  std::string nodes_tsv() const;
  std::string edges_tsv() const;

  std::size_t node_count() const { return node_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  NodeId node_id(NodeIndex i) const { return node_ids_[i]; }
  TypeId node_type(NodeIndex i) const { return node_types_[i]; }
  std::size_t node_type_count() const { return node_type_names_.size(); }
  std::size_t edge_type_count() const { return edge_type_names_.size(); }
  const std::string& node_type_name(TypeId t) const { return node_type_names_[t]; }
  const std::string& edge_type_name(TypeId t) const { return edge_type_names_[t]; }
  TypeId target_type() const { return target_type_; }
  bool is_target(NodeIndex i) const { return node_types_[i] == target_type_; }
  int label(NodeIndex i) const { return labels_[i]; }
  SplitTag split(NodeIndex i) const { return splits_[i]; }
  int class_count() const { return class_count_; }
  const std::optional<Matrix>& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  // Unweighted degree (each stored edge counts once per endpoint;
  // self-loops count once).
  std::size_t degree(NodeIndex i) const { return degree_[i]; }

  std::vector<NodeIndex> target_node_indices() const;
  std::vector<NodeIndex> train_target_nodes() const;

  // Copy with the cross-type edge set replaced by `keep` (edge ids of
  // this graph). Same-type edges are preserved verbatim.
  HeteroGraph with_cross_edges(const std::vector<EdgeId>& keep) const;
  // Copy with new split tags for target nodes (indexed by node index).
  HeteroGraph with_splits(const std::vector<SplitTag>& splits) const;
  // Copy with a feature matrix attached.
  HeteroGraph with_features(Matrix features) const;

  Parts to_parts() const;

 private:
  std::vector<NodeId> node_ids_;
  std::vector<TypeId> node_types_;
  std::vector<std::string> node_type_names_;
  std::vector<std::string> edge_type_names_;
  std::vector<Edge> edges_;
  TypeId target_type_ = 0;
  std::optional<Matrix> features_;
  std::vector<int> labels_;
  std::vector<SplitTag> splits_;
  std::vector<std::size_t> degree_;
  int class_count_ = 0;

  void validate() const;
};

EdgePartition partition_edges(const HeteroGraph& g);
CrossTypeView cross_view(const HeteroGraph& g);
CrossTypeView cross_view(const HeteroGraph& g, const EdgePartition& parts);

const char* split_name(SplitTag s);
SplitTag split_from_name(const std::string& name);

}  // namespace cthge
