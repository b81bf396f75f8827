#include "cthge/chr.hpp"

#include <cmath>
#include <string>

#include "cthge/error.hpp"

namespace cthge {
namespace chr {

Matrix init_target_info(const HeteroGraph& g, const Matrix* unlabeled_logits) {
  if (g.class_count() < 2) {
    throw ValidationError("target information needs a labeled graph (>= 2 classes)");
  }
  std::size_t classes = static_cast<std::size_t>(g.class_count());
  auto targets = g.target_node_indices();

  std::vector<NodeIndex> unlabeled;
  for (NodeIndex v : targets) {
    if (g.split(v) != SplitTag::kTrain) unlabeled.push_back(v);
  }
  if (unlabeled_logits) {
    if (unlabeled_logits->rows != unlabeled.size() || unlabeled_logits->cols != classes) {
      throw DimensionError("logits shape " + std::to_string(unlabeled_logits->rows) + "x" +
                           std::to_string(unlabeled_logits->cols) + " does not match " +
                           std::to_string(unlabeled.size()) + " unlabeled target nodes x " +
                           std::to_string(classes) + " classes");
    }
    for (double v : unlabeled_logits->data) {
      if (!std::isfinite(v)) throw NumericError("non-finite logit");
    }
  }

  Matrix l(targets.size(), classes);
  Matrix soft;
  if (unlabeled_logits) soft = softmax_rows(*unlabeled_logits);
  std::size_t next_unlabeled = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    NodeIndex v = targets[i];
    if (g.split(v) == SplitTag::kTrain) {
      int y = g.label(v);
      if (y < 0 || static_cast<std::size_t>(y) >= classes) {
        throw ValidationError("train node label out of range");
      }
      l.at(i, static_cast<std::size_t>(y)) = 1.0;
    } else {
      if (unlabeled_logits) {
        const double* srow = soft.row(next_unlabeled);
        std::copy(srow, srow + classes, l.row(i));
      } else {
        for (std::size_t c = 0; c < classes; ++c) l.at(i, c) = 1.0 / static_cast<double>(classes);
      }
      ++next_unlabeled;
    }
  }
  return l;
}

Matrix propagate(const CrossTypeView& view, const Matrix& l) {
  if (l.rows != view.n_t) {
    throw DimensionError("propagate: L has " + std::to_string(l.rows) + " rows, expected " +
                         std::to_string(view.n_t));
  }
  Matrix p;
  view.a_nt.multiply(l, p);
  return p;
}

NormalizedRows normalize_rows(const Matrix& p) {
  NormalizedRows out;
  out.p_prime = p;
  out.isolated.assign(p.rows, false);
  for (std::size_t i = 0; i < p.rows; ++i) {
    double* row = out.p_prime.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < p.cols; ++j) {
      if (row[j] < 0.0) {
        throw NumericError("normalize_rows: negative entry at row " + std::to_string(i));
      }
      sum += row[j];
    }
    if (sum == 0.0) {
      out.isolated[i] = true;
    } else {
      for (std::size_t j = 0; j < p.cols; ++j) row[j] /= sum;
    }
  }
  return out;
}

TargetInfoMatrix build_target_info(const HeteroGraph& g, const CrossTypeView& view, Matrix l,
                                   NormalizedRows p_prime) {
  if (l.rows != view.n_t || p_prime.p_prime.rows != view.n_n ||
      (view.n_n > 0 && l.cols != p_prime.p_prime.cols)) {
    throw DimensionError("build_target_info: block shapes disagree");
  }
  TargetInfoMatrix info;
  info.n_t = view.n_t;
  info.n_n = view.n_n;
  info.classes = l.cols;
  info.h = Matrix(view.n_t + view.n_n, l.cols);
  for (std::size_t i = 0; i < view.n_t; ++i) {
    std::copy(l.row(i), l.row(i) + l.cols, info.h.row(i));
  }
  for (std::size_t i = 0; i < view.n_n; ++i) {
    const double* src = p_prime.p_prime.row(i);
    std::copy(src, src + l.cols, info.h.row(view.n_t + i));
  }
  info.isolated = std::move(p_prime.isolated);
  info.row_of_node.assign(g.node_count(), -1);
  for (std::size_t i = 0; i < view.n_t; ++i) {
    info.row_of_node[view.target_nodes[i]] = static_cast<std::int32_t>(i);
  }
  for (std::size_t i = 0; i < view.n_n; ++i) {
    info.row_of_node[view.nontarget_nodes[i]] = static_cast<std::int32_t>(view.n_t + i);
  }
  return info;
}

TargetInfoMatrix target_info(const HeteroGraph& g, const Matrix* logits) {
  CrossTypeView view = cross_view(g);
  Matrix l;
  if (logits) {
    if (logits->rows != g.node_count()) {
      throw DimensionError("target_info: logits must have one row per node");
    }
    std::vector<NodeIndex> unlabeled;
    for (NodeIndex v : view.target_nodes) {
      if (g.split(v) != SplitTag::kTrain) unlabeled.push_back(v);
    }
    Matrix sliced(unlabeled.size(), logits->cols);
    for (std::size_t i = 0; i < unlabeled.size(); ++i) {
      const double* src = logits->row(unlabeled[i]);
      std::copy(src, src + logits->cols, sliced.row(i));
    }
    l = init_target_info(g, &sliced);
  } else {
    l = init_target_info(g, nullptr);
  }
  Matrix p = propagate(view, l);
  return build_target_info(g, view, std::move(l), normalize_rows(p));
}

TargetInfoMatrix onehot_target_info(const HeteroGraph& g,
                                    const std::vector<int>& nontarget_classes) {
  CrossTypeView view = cross_view(g);
  if (nontarget_classes.size() != view.n_n) {
    throw DimensionError("onehot_target_info: one class per non-target node required");
  }
  std::size_t classes = static_cast<std::size_t>(g.class_count());
  Matrix l(view.n_t, classes);
  for (std::size_t i = 0; i < view.n_t; ++i) {
    int y = g.label(view.target_nodes[i]);
    if (y < 0) throw ValidationError("onehot_target_info: unlabeled target node");
    l.at(i, static_cast<std::size_t>(y)) = 1.0;
  }
  NormalizedRows rows;
  rows.p_prime = Matrix(view.n_n, classes);
  rows.isolated.assign(view.n_n, false);
  for (std::size_t i = 0; i < view.n_n; ++i) {
    int y = nontarget_classes[i];
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw ValidationError("onehot_target_info: non-target class out of range");
    }
    rows.p_prime.at(i, static_cast<std::size_t>(y)) = 1.0;
  }
  return build_target_info(g, view, std::move(l), std::move(rows));
}

double edge_similarity(const TargetInfoMatrix& info, NodeIndex a, NodeIndex b) {
  return dot(info.node_row(a), info.node_row(b), info.classes);
}

std::vector<double> edge_similarities(const HeteroGraph& g, const TargetInfoMatrix& info,
                                      const std::vector<EdgeId>& edges) {
  std::vector<double> sims(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = g.edge(edges[i]);
    sims[i] = edge_similarity(info, e.u, e.v);
  }
  return sims;
}

double mean_similarity(const HeteroGraph& g, const TargetInfoMatrix& info,
                       const std::vector<EdgeId>& edges) {
  if (edges.empty()) {
    throw UndefinedMetricError("mean similarity over an empty edge set is undefined");
  }
  std::vector<double> sims = edge_similarities(g, info, edges);
  return pairwise_sum(sims) / static_cast<double>(sims.size());
}

double compute_chr(const HeteroGraph& g, const TargetInfoMatrix& info) {
  EdgePartition parts = partition_edges(g);
  if (parts.tn.empty()) {
    throw UndefinedMetricError("CHR is undefined: graph has no cross-type edges");
  }
  return mean_similarity(g, info, parts.tn);
}

double homophily_ratio(const HeteroGraph& g) {
  if (g.edge_count() == 0) {
    throw UndefinedMetricError("homophily ratio is undefined on an edgeless graph");
  }
  std::vector<double> match(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    int yu = g.label(g.edge(e).u);
    int yv = g.label(g.edge(e).v);
    if (yu == kNoLabel || yv == kNoLabel) {
      throw ValidationError("homophily ratio needs labels on every node");
    }
    match[e] = (yu == yv) ? 1.0 : 0.0;
  }
  return pairwise_sum(match) / static_cast<double>(match.size());
}

}  // namespace chr
}  // namespace cthge
