#pragma once

#include <optional>
#include <vector>

#include "cthge/hetgraph.hpp"
#include "cthge/matrix.hpp"

namespace cthge {
namespace chr {

// Per-node class-distribution matrix: target rows first (one-hot for
// train nodes, softmaxed logits otherwise), then L1-normalized
// propagated rows for non-target nodes. Rows of isolated non-target
// nodes are all-zero and flagged.
struct TargetInfoMatrix {
  Matrix h;  // (n_t + n_n) x classes
  std::size_t n_t = 0;
  std::size_t n_n = 0;
  std::size_t classes = 0;
  std::vector<std::int32_t> row_of_node;  // node index -> row of h
  std::vector<bool> isolated;             // per non-target ordinal

  const double* node_row(NodeIndex v) const { return h.row(row_of_node[v]); }
};

// Initial target-node matrix L: one-hot rows for train nodes, softmax
// of the supplied logits for the rest. `unlabeled_logits` has one row
// per non-train target node in canonical target order; when absent,
// those rows fall back to the uniform distribution over classes.
Matrix init_target_info(const HeteroGraph& g, const Matrix* unlabeled_logits);

// P = (W o A_nt) L: weighted propagation of target information across
// cross-type edges.
Matrix propagate(const CrossTypeView& view, const Matrix& l);

struct NormalizedRows {
  Matrix p_prime;
  std::vector<bool> isolated;  // true for rows that were all-zero
};

// L1-normalizes each row into a distribution; zero rows stay zero.
NormalizedRows normalize_rows(const Matrix& p);

TargetInfoMatrix build_target_info(const HeteroGraph& g, const CrossTypeView& view,
                                   Matrix l, NormalizedRows p_prime);

// Convenience composition of the four steps above. `logits` is a full
// node_count x classes matrix (only non-train target rows are read);
// pass nullptr for the uniform fallback.
TargetInfoMatrix target_info(const HeteroGraph& g, const Matrix* logits);

// One-hot matrix from explicit per-node classes (targets use their own
// label; non-targets use `nontarget_classes` by non-target ordinal).
// This is the oracle construction used with synthetic ground truth.
TargetInfoMatrix onehot_target_info(const HeteroGraph& g,
                                    const std::vector<int>& nontarget_classes);

double edge_similarity(const TargetInfoMatrix& info, NodeIndex a, NodeIndex b);

// Similarity of every cross-type edge, parallel to `edges`.
std::vector<double> edge_similarities(const HeteroGraph& g, const TargetInfoMatrix& info,
                                      const std::vector<EdgeId>& edges);

// Mean similarity over an explicit edge set; pairwise summation keeps
// the reduction deterministic.
double mean_similarity(const HeteroGraph& g, const TargetInfoMatrix& info,
                       const std::vector<EdgeId>& edges);

// Cross-Type Homophily Ratio: mean similarity over all cross-type
// edges. Throws UndefinedMetricError when the graph has none.
double compute_chr(const HeteroGraph& g, const TargetInfoMatrix& info);

// Classic homophily ratio of a homogeneous graph: fraction of edges
// whose endpoints share a label. Requires every node to be labeled.
double homophily_ratio(const HeteroGraph& g);

}  // namespace chr
}  // namespace cthge
