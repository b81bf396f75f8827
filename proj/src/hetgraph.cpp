#include "cthge/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cthge/error.hpp"
#include "cthge/text.hpp"

namespace cthge {

namespace {

TypeId intern_type(std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<TypeId>(i);
  }
  names.push_back(name);
  return static_cast<TypeId>(names.size() - 1);
}

std::vector<std::string_view> nonempty_lines(std::string_view text,
                                             std::vector<std::size_t>& line_numbers) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  std::size_t lineno = 1;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    std::string_view line = (pos == std::string_view::npos)
                                ? text.substr(start)
                                : text.substr(start, pos - start);
    if (!line.empty()) {
      lines.push_back(line);
      line_numbers.push_back(lineno);
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
    ++lineno;
  }
  return lines;
}

}  // namespace

const char* split_name(SplitTag s) {
  switch (s) {
    case SplitTag::kTrain: return "train";
    case SplitTag::kVal: return "val";
    case SplitTag::kTest: return "test";
    default: return "-";
  }
}

SplitTag split_from_name(const std::string& name) {
  if (name == "train") return SplitTag::kTrain;
  if (name == "val") return SplitTag::kVal;
  if (name == "test") return SplitTag::kTest;
  if (name == "-") return SplitTag::kNone;
  throw ParseError("unknown split tag '" + name + "'");
}

HeteroGraph HeteroGraph::load(const std::string& nodes_path, const std::string& edges_path,
                              const std::string& target_type_name) {
  Parts parts;
  parts.target_type_name = target_type_name;

  std::string nodes_text = read_file(nodes_path);
  std::vector<std::size_t> node_linenos;
  auto node_lines = nonempty_lines(nodes_text, node_linenos);

  std::unordered_map<NodeId, NodeIndex> index_of_id;
  std::vector<std::vector<double>> feature_rows;
  bool any_features = false;

  for (std::size_t li = 0; li < node_lines.size(); ++li) {
    std::string ctx = nodes_path + ":" + std::to_string(node_linenos[li]);
    auto fields = split_on(node_lines[li], '\t');
    if (fields.size() < 4 || fields.size() > 5) {
      throw ParseError(ctx + ": expected 4 or 5 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    NodeId id = parse_int(fields[0], ctx);
    if (index_of_id.count(id)) {
      throw ValidationError(ctx + ": duplicate node id " + std::to_string(id));
    }
    index_of_id.emplace(id, static_cast<NodeIndex>(parts.node_ids.size()));
    parts.node_ids.push_back(id);
    parts.node_types.push_back(intern_type(parts.node_type_names, std::string(fields[1])));
    if (fields[2] == "-") {
      parts.labels.push_back(kNoLabel);
    } else {
      std::int64_t label = parse_int(fields[2], ctx);
      if (label < 0) throw ValidationError(ctx + ": negative class id");
      parts.labels.push_back(static_cast<int>(label));
    }
    try {
      parts.splits.push_back(split_from_name(std::string(fields[3])));
    } catch (const ParseError& e) {
      throw ParseError(ctx + ": " + e.what());
    }
    if (fields.size() == 5 && !fields[4].empty()) {
      any_features = true;
      std::vector<double> row;
      for (auto f : split_on(fields[4], ',')) row.push_back(parse_real(f, ctx));
      feature_rows.push_back(std::move(row));
    } else {
      feature_rows.emplace_back();
    }
  }
  if (parts.node_ids.empty()) throw ValidationError(nodes_path + ": no nodes");

  if (any_features) {
    std::size_t dim = 0;
    for (const auto& r : feature_rows) dim = std::max(dim, r.size());
    Matrix feats(parts.node_ids.size(), dim);
    for (std::size_t i = 0; i < feature_rows.size(); ++i) {
      if (feature_rows[i].size() != dim) {
        throw DimensionError(nodes_path + ": node " + std::to_string(parts.node_ids[i]) +
                             " has " + std::to_string(feature_rows[i].size()) +
                             " features, expected " + std::to_string(dim));
      }
      for (std::size_t j = 0; j < dim; ++j) feats.at(i, j) = feature_rows[i][j];
    }
    parts.features = std::move(feats);
  }

  std::string edges_text = read_file(edges_path);
  std::vector<std::size_t> edge_linenos;
  auto edge_lines = nonempty_lines(edges_text, edge_linenos);
  for (std::size_t li = 0; li < edge_lines.size(); ++li) {
    std::string ctx = edges_path + ":" + std::to_string(edge_linenos[li]);
    auto fields = split_on(edge_lines[li], '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(ctx + ": expected 3 or 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    NodeId src = parse_int(fields[0], ctx);
    NodeId dst = parse_int(fields[1], ctx);
    auto src_it = index_of_id.find(src);
    auto dst_it = index_of_id.find(dst);
    if (src_it == index_of_id.end() || dst_it == index_of_id.end()) {
      throw ValidationError(ctx + ": edge endpoint " +
                            std::to_string(src_it == index_of_id.end() ? src : dst) +
                            " is not a declared node");
    }
    Edge e;
    e.u = src_it->second;
    e.v = dst_it->second;
    e.type = intern_type(parts.edge_type_names, std::string(fields[2]));
    e.weight = fields.size() == 4 ? parse_real(fields[3], ctx) : 1.0;
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError(ctx + ": edge weight must be a nonnegative finite real");
    }
    parts.edges.push_back(e);
  }

  return from_parts(std::move(parts));
}

HeteroGraph HeteroGraph::from_parts(Parts parts) {
  std::size_t n = parts.node_ids.size();
  if (parts.labels.size() != n || parts.splits.size() != n || parts.node_types.size() != n) {
    throw DimensionError("node attribute arrays disagree on node count");
  }

  // Canonical node order: ascending external id.
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](NodeIndex a, NodeIndex b) { return parts.node_ids[a] < parts.node_ids[b]; });
  std::vector<NodeIndex> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<NodeIndex>(i);

  HeteroGraph g;
  g.node_ids_.resize(n);
  g.node_types_.resize(n);
  g.labels_.resize(n);
  g.splits_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.node_ids_[i] = parts.node_ids[order[i]];
    g.node_types_[i] = parts.node_types[order[i]];
    g.labels_[i] = parts.labels[order[i]];
    g.splits_[i] = parts.splits[order[i]];
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (g.node_ids_[i] == g.node_ids_[i - 1]) {
      throw ValidationError("duplicate node id " + std::to_string(g.node_ids_[i]));
    }
  }
  g.node_type_names_ = std::move(parts.node_type_names);
  g.edge_type_names_ = std::move(parts.edge_type_names);

  if (parts.features) {
    Matrix feats(n, parts.features->cols);
    for (std::size_t i = 0; i < n; ++i) {
      const double* src = parts.features->row(order[i]);
      std::copy(src, src + feats.cols, feats.row(i));
    }
    g.features_ = std::move(feats);
  }

  bool found_target = false;
  for (std::size_t t = 0; t < g.node_type_names_.size(); ++t) {
    if (g.node_type_names_[t] == parts.target_type_name) {
      g.target_type_ = static_cast<TypeId>(t);
      found_target = true;
    }
  }
  if (!found_target) {
    throw ConfigError("target type '" + parts.target_type_name +
                      "' does not occur among node types");
  }

  g.edges_ = std::move(parts.edges);
  for (Edge& e : g.edges_) {
    if (e.u >= n || e.v >= n) throw ValidationError("edge endpoint out of range");
    e.u = rank[e.u];
    e.v = rank[e.v];
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  // Canonical edge order: endpoint ids, then edge type name, then weight.
  std::sort(g.edges_.begin(), g.edges_.end(), [&](const Edge& a, const Edge& b) {
    if (a.u != b.u) return a.u < b.u;
    if (a.v != b.v) return a.v < b.v;
    if (a.type != b.type) return g.edge_type_names_[a.type] < g.edge_type_names_[b.type];
    return a.weight < b.weight;
  });

  g.degree_.assign(n, 0);
  for (const Edge& e : g.edges_) {
    g.degree_[e.u]++;
    if (e.v != e.u) g.degree_[e.v]++;
  }

  int max_label = kNoLabel;
  for (std::size_t i = 0; i < n; ++i) max_label = std::max(max_label, g.labels_[i]);
  g.class_count_ = max_label + 1;

  g.validate();
  return g;
}

void HeteroGraph::validate() const {
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (labels_[i] != kNoLabel && !is_target(static_cast<NodeIndex>(i))) {
      throw ValidationError("label on non-target node " + std::to_string(node_ids_[i]));
    }
    if (is_target(static_cast<NodeIndex>(i)) && splits_[i] == SplitTag::kTrain &&
        labels_[i] == kNoLabel) {
      throw ValidationError("train-split target node " + std::to_string(node_ids_[i]) +
                            " has no label");
    }
  }
  if (class_count_ == 1) {
    throw ValidationError("labeled graphs need at least 2 classes");
  }
  if (features_ && features_->rows != node_count()) {
    throw DimensionError("feature matrix row count does not match node count");
  }
}

std::string HeteroGraph::nodes_tsv() const {
  std::string out;
  for (std::size_t i = 0; i < node_count(); ++i) {
    out += std::to_string(node_ids_[i]);
    out += '\t';
    out += node_type_names_[node_types_[i]];
    out += '\t';
    out += labels_[i] == kNoLabel ? "-" : std::to_string(labels_[i]);
    out += '\t';
    out += split_name(splits_[i]);
    if (features_) {
      out += '\t';
      const double* row = features_->row(i);
      for (std::size_t j = 0; j < features_->cols; ++j) {
        if (j) out += ',';
        out += fmt_double(row[j]);
      }
    }
    out += '\n';
  }
  return out;
}

std::string HeteroGraph::edges_tsv() const {
  std::string out;
  for (const Edge& e : edges_) {
    out += std::to_string(node_ids_[e.u]);
    out += '\t';
    out += std::to_string(node_ids_[e.v]);
    out += '\t';
    out += edge_type_names_[e.type];
    out += '\t';
    out += fmt_double(e.weight);
    out += '\n';
  }
  return out;
}

void HeteroGraph::save(const std::string& nodes_path, const std::string& edges_path) const {
  write_file(nodes_path, nodes_tsv());
  write_file(edges_path, edges_tsv());
}

std::vector<NodeIndex> HeteroGraph::target_node_indices() const {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (is_target(static_cast<NodeIndex>(i))) out.push_back(static_cast<NodeIndex>(i));
  }
  return out;
}

std::vector<NodeIndex> HeteroGraph::train_target_nodes() const {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < node_count(); ++i) {
    if (is_target(static_cast<NodeIndex>(i)) && splits_[i] == SplitTag::kTrain) {
      out.push_back(static_cast<NodeIndex>(i));
    }
  }
  return out;
}

HeteroGraph HeteroGraph::with_cross_edges(const std::vector<EdgeId>& keep) const {
  EdgePartition parts = partition_edges(*this);
  std::vector<bool> is_cross(edge_count(), false);
  for (EdgeId e : parts.tn) is_cross[e] = true;
  for (EdgeId e : keep) {
    if (e >= edge_count() || !is_cross[e]) {
      throw ValidationError("with_cross_edges: edge " + std::to_string(e) +
                            " is not a cross-type edge of this graph");
    }
  }
  std::vector<bool> keep_mask(edge_count(), false);
  for (EdgeId e : parts.tt) keep_mask[e] = true;
  for (EdgeId e : parts.nn) keep_mask[e] = true;
  for (EdgeId e : keep) keep_mask[e] = true;

  Parts p = to_parts();
  p.edges.clear();
  for (EdgeId e = 0; e < edge_count(); ++e) {
    if (keep_mask[e]) p.edges.push_back(edges_[e]);
  }
  return from_parts(std::move(p));
}

HeteroGraph HeteroGraph::with_splits(const std::vector<SplitTag>& splits) const {
  if (splits.size() != node_count()) {
    throw DimensionError("split assignment size does not match node count");
  }
  Parts p = to_parts();
  p.splits = splits;
  return from_parts(std::move(p));
}

HeteroGraph HeteroGraph::with_features(Matrix features) const {
  Parts p = to_parts();
  p.features = std::move(features);
  return from_parts(std::move(p));
}

EdgePartition partition_edges(const HeteroGraph& g) {
  EdgePartition parts;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    bool ut = g.is_target(g.edge(e).u);
    bool vt = g.is_target(g.edge(e).v);
    if (ut && vt) {
      parts.tt.push_back(e);
    } else if (!ut && !vt) {
      parts.nn.push_back(e);
    } else {
      parts.tn.push_back(e);
    }
  }
  return parts;
}

CrossTypeView cross_view(const HeteroGraph& g) { return cross_view(g, partition_edges(g)); }

CrossTypeView cross_view(const HeteroGraph& g, const EdgePartition& parts) {
  CrossTypeView view;
  std::size_t n = g.node_count();
  view.target_ordinal.assign(n, -1);
  view.nontarget_ordinal.assign(n, -1);
  for (NodeIndex i = 0; i < n; ++i) {
    if (g.is_target(i)) {
      view.target_ordinal[i] = static_cast<std::int32_t>(view.target_nodes.size());
      view.target_nodes.push_back(i);
    } else {
      view.nontarget_ordinal[i] = static_cast<std::int32_t>(view.nontarget_nodes.size());
      view.nontarget_nodes.push_back(i);
    }
  }
  view.n_t = view.target_nodes.size();
  view.n_n = view.nontarget_nodes.size();
  view.e_tn = parts.tn;

  std::vector<Csr::Entry> entries;
  entries.reserve(parts.tn.size());
  for (EdgeId e : parts.tn) {
    const Edge& edge = g.edge(e);
    NodeIndex t = g.is_target(edge.u) ? edge.u : edge.v;
    NodeIndex nt = g.is_target(edge.u) ? edge.v : edge.u;
    entries.push_back({static_cast<std::uint32_t>(view.nontarget_ordinal[nt]),
                       static_cast<std::uint32_t>(view.target_ordinal[t]), edge.weight});
  }
  view.a_nt = Csr::from_entries(view.n_n, view.n_t, std::move(entries));
  view.a_tn = view.a_nt.transpose();
  return view;
}

HeteroGraph::Parts HeteroGraph::to_parts() const {
  Parts p;
  p.node_ids = node_ids_;
  p.node_types = node_types_;
  p.node_type_names = node_type_names_;
  p.edge_type_names = edge_type_names_;
  p.edges = edges_;
  p.target_type_name = node_type_names_[target_type_];
  p.features = features_;
  p.labels = labels_;
  p.splits = splits_;
  return p;
}

}  // namespace cthge
