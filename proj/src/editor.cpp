#include "cthge/editor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cthge/error.hpp"
#include "cthge/text.hpp"

namespace cthge {
namespace edit {

std::vector<double> PruneConfig::default_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(static_cast<double>(i) * 0.05);
  return grid;
}

void RefineConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ConfigError("refine alpha must lie in (0, 0.5)");
  }
  if (iterations < 1) throw ConfigError("refine iterations must be >= 1");
  if (offset < 0.0 || gamma < 0.0) throw ConfigError("offset and gamma must be nonnegative");
}

double RefineConfig::round_ratio(int round) const {
  double ratio = offset + static_cast<double>(round) * gamma * alpha;
  return std::clamp(ratio, 0.0, 0.5 - 1e-12);
}

const char* action_name(EdgeAction a) {
  switch (a) {
    case EdgeAction::kKeep: return "keep";
    case EdgeAction::kPrune: return "prune";
    case EdgeAction::kRecover: return "recover";
    default: return "remove";
  }
}

std::string EditPlan::plan_csv() const {
  std::string out = "edge_id,stage,similarity,percentile,action\n";
  for (const EdgeRecord& r : records) {
    out += std::to_string(r.edge);
    out += ',';
    out += r.stage;
    out += ',';
    out += fmt_double(r.similarity);
    out += ',';
    out += r.percentile < 0.0 ? "-" : fmt_double(r.percentile);
    out += ',';
    out += action_name(r.action);
    out += '\n';
  }
  return out;
}

std::string EditPlan::report_csv() const {
  std::string out = "stage,chr,e_tn\n";
  for (const StageChr& s : stage_chr) {
    out += s.stage;
    out += ',';
    out += fmt_double(s.chr);
    out += ',';
    out += std::to_string(s.e_tn);
    out += '\n';
  }
  return out;
}

EditPlan prune_phase1(const HeteroGraph& g, const chr::TargetInfoMatrix& info,
                      const PruneConfig& cfg) {
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  EdgePartition parts = partition_edges(g);
  if (parts.tn.empty()) {
    throw UndefinedMetricError("graph has no cross-type edges to prune");
  }
  std::vector<double> sims = chr::edge_similarities(g, info, parts.tn);

  EditPlan plan;
  plan.tau = cfg.tau;
  plan.e_tn = parts.tn;
  std::vector<double> kept_sims;
  for (std::size_t i = 0; i < parts.tn.size(); ++i) {
    if (sims[i] >= cfg.tau) {
      plan.e_prune.push_back(parts.tn[i]);
      kept_sims.push_back(sims[i]);
    } else {
      plan.e_cand.push_back(parts.tn[i]);
    }
  }
  if (plan.e_prune.empty()) {
    throw PruneError("tau=" + fmt_double(cfg.tau) +
                     " prunes every cross-type edge; lower tau (propagation needs a non-empty "
                     "cross-type edge set)");
  }

  double chr_all = pairwise_sum(sims) / static_cast<double>(sims.size());
  double chr_prune = pairwise_sum(kept_sims) / static_cast<double>(kept_sims.size());
  plan.stage_chr.push_back({"initial", chr_all, parts.tn.size()});
  plan.stage_chr.push_back({"phase1", chr_prune, plan.e_prune.size()});

  std::vector<double> percentiles = score_percentiles(sims);
  for (std::size_t i = 0; i < parts.tn.size(); ++i) {
    plan.records.push_back({parts.tn[i], "phase1", sims[i], percentiles[i],
                            sims[i] >= cfg.tau ? EdgeAction::kKeep : EdgeAction::kPrune});
  }
  plan.e_final = plan.e_prune;
  return plan;
}

double select_tau(const HeteroGraph& g, const chr::TargetInfoMatrix& info,
                  const std::vector<double>& grid,
                  const std::function<double(double, const HeteroGraph&)>& validation_eval) {
  if (grid.empty()) throw ConfigError("tau grid is empty");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  bool any = false;
  double best_tau = 0.0;
  double best_score = 0.0;
  for (double tau : sorted) {
    PruneConfig cfg;
    cfg.tau = tau;
    EditPlan plan;
    try {
      plan = prune_phase1(g, info, cfg);
    } catch (const PruneError&) {
      continue;
    }
    HeteroGraph pruned = g.with_cross_edges(plan.e_prune);
    double score = validation_eval(tau, pruned);
    if (!any || score > best_score) {
      any = true;
      best_score = score;
      best_tau = tau;
    }
  }
  if (!any) {
    throw SearchError("every tau on the grid prunes all cross-type edges");
  }
  return best_tau;
}

PseudoLabelState propagate_pseudo(const HeteroGraph& g) {
  if (g.class_count() < 2) throw ValidationError("propagate_pseudo needs a labeled graph");
  CrossTypeView view = cross_view(g);
  std::size_t classes = static_cast<std::size_t>(g.class_count());

  PseudoLabelState state;
  state.p0 = Matrix(view.n_n, classes);
  std::vector<std::vector<NodeIndex>> unlabeled_nbrs(view.n_n);
  for (EdgeId e : view.e_tn) {
    const Edge& edge = g.edge(e);
    NodeIndex t = g.is_target(edge.u) ? edge.u : edge.v;
    NodeIndex nt = g.is_target(edge.u) ? edge.v : edge.u;
    std::size_t ord = static_cast<std::size_t>(view.nontarget_ordinal[nt]);
    if (g.split(t) == SplitTag::kTrain) {
      state.p0.at(ord, static_cast<std::size_t>(g.label(t))) += 1.0;
    } else {
      unlabeled_nbrs[ord].push_back(t);
    }
  }

  state.margins.assign(view.n_n, 0.0);
  for (std::size_t i = 0; i < view.n_n; ++i) {
    const double* row = state.p0.row(i);
    double top = row[0], second = -1.0;
    std::size_t top_class = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (row[c] > top) {
        second = top;
        top = row[c];
        top_class = c;
      } else if (row[c] > second) {
        second = row[c];
      }
    }
    if (second < 0.0) second = 0.0;
    state.margins[i] = top - second;

    auto& nbrs = unlabeled_nbrs[i];
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    if (state.margins[i] > static_cast<double>(nbrs.size())) {
      NodeIndex node = view.nontarget_nodes[i];
      state.confident_set.push_back(node);
      state.pseudo_labels[node] = static_cast<int>(top_class);
    }
  }
  return state;
}

double soft_similarity(const Matrix& logits, const HeteroGraph& g, NodeIndex non_target,
                       NodeIndex target) {
  std::size_t c = logits.cols;
  int label = g.label(target);
  if (g.split(target) != SplitTag::kTrain || label == kNoLabel) {
    const double* trow = logits.row(target);
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (trow[k] > trow[best]) best = k;
    }
    label = static_cast<int>(best);
  }
  const double* row = logits.row(non_target);
  double mx = row[0];
  for (std::size_t k = 1; k < c; ++k) mx = std::max(mx, row[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < c; ++k) sum += std::exp(row[k] - mx);
  return std::exp(row[static_cast<std::size_t>(label)] - mx) / sum;
}

std::vector<double> soft_scores(const Matrix& logits, const HeteroGraph& g,
                                const std::vector<EdgeId>& edges) {
  std::vector<double> out(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = g.edge(edges[i]);
    NodeIndex t = g.is_target(e.u) ? e.u : e.v;
    NodeIndex nt = g.is_target(e.u) ? e.v : e.u;
    out[i] = soft_similarity(logits, g, nt, t);
  }
  return out;
}

std::vector<double> score_percentiles(const std::vector<double>& scores) {
  std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> pct(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double p = static_cast<double>(i) / static_cast<double>(n);  // strictly-greater count
    for (std::size_t k = i; k <= j; ++k) pct[order[k]] = p;
    i = j + 1;
  }
  return pct;
}

RefineOutcome rank_and_refine(const std::vector<EdgeId>& universe,
                              const std::vector<EdgeId>& active,
                              const std::vector<double>& scores, double alpha) {
  if (scores.size() != universe.size()) {
    throw DimensionError("rank_and_refine: one score per universe edge required");
  }
  std::vector<bool> is_active;
  {
    EdgeId max_id = 0;
    for (EdgeId e : universe) max_id = std::max(max_id, e);
    is_active.assign(static_cast<std::size_t>(max_id) + 1, false);
    for (EdgeId e : active) is_active[e] = true;
  }
  RefineOutcome out;
  out.percentiles = score_percentiles(scores);
  for (std::size_t i = 0; i < universe.size(); ++i) {
    EdgeId e = universe[i];
    double pct = out.percentiles[i];
    if (is_active[e]) {
      // alpha = 0 keeps everything: percentile never exceeds 1.
      if (pct > 1.0 - alpha) {
        out.removed.push_back(e);
      } else {
        out.active.push_back(e);
      }
    } else {
      // A zero budget recovers nothing, even though the top-ranked edge
      // has percentile exactly 0.
      if (alpha > 0.0 && pct <= alpha) {
        out.recovered.push_back(e);
        out.active.push_back(e);
      }
    }
  }
  std::sort(out.active.begin(), out.active.end());
  return out;
}

namespace {

std::vector<gnn::Example> pseudo_examples(const PseudoLabelState& state) {
  std::vector<gnn::Example> out;
  out.reserve(state.pseudo_labels.size());
  for (const auto& [node, label] : state.pseudo_labels) out.push_back({node, label});
  return out;
}

double chr_with_model(const HeteroGraph& g, const gnn::GcnModel& model) {
  Matrix logits = gnn::forward(model, g);
  chr::TargetInfoMatrix info = chr::target_info(g, &logits);
  return chr::compute_chr(g, info);
}

std::vector<EdgeId> sorted_difference(const std::vector<EdgeId>& a, const std::vector<EdgeId>& b) {
  std::vector<EdgeId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

EditPlan iterative_refine(const HeteroGraph& g, gnn::GcnModel& model, EditPlan plan,
                          const RefineConfig& cfg, const gnn::TrainConfig& train_cfg) {
  cfg.validate();
  std::vector<EdgeId> universe = plan.e_tn;
  std::vector<EdgeId> active = plan.e_prune;

  for (int round = 1; round <= cfg.iterations; ++round) {
    double alpha_r = cfg.round_ratio(round);
    HeteroGraph current = g.with_cross_edges(active);
    PseudoLabelState pseudo = propagate_pseudo(current);
    try {
      gnn::fine_tune(model, current, pseudo_examples(pseudo), train_cfg);
    } catch (const DivergenceError&) {
      plan.aborted = true;
      break;
    }
    Matrix logits = gnn::forward(model, current);
    std::vector<double> scores = soft_scores(logits, g, universe);
    RefineOutcome outcome = rank_and_refine(universe, active, scores, alpha_r);
    if (outcome.active.empty()) {
      plan.aborted = true;
      break;
    }
    std::string stage = "round" + std::to_string(round);
    for (std::size_t i = 0; i < universe.size(); ++i) {
      EdgeId e = universe[i];
      bool rec = std::binary_search(outcome.recovered.begin(), outcome.recovered.end(), e);
      bool rem = std::binary_search(outcome.removed.begin(), outcome.removed.end(), e);
      if (rec || rem) {
        plan.records.push_back({e, stage, scores[i], outcome.percentiles[i],
                                rec ? EdgeAction::kRecover : EdgeAction::kRemove});
      }
    }
    active = outcome.active;
    HeteroGraph after = g.with_cross_edges(active);
    plan.stage_chr.push_back({stage, chr_with_model(after, model), active.size()});
  }

  plan.e_final = active;
  plan.e_rec = sorted_difference(active, plan.e_prune);
  plan.e_rem = sorted_difference(plan.e_prune, active);
  return plan;
}

eval::EvalReport train_eval_split(const HeteroGraph& g, const gnn::TrainConfig& cfg,
                                  SplitTag which) {
  HeteroGraph graph = g.features() ? g : g.with_features(gnn::synthesize_features(g));
  gnn::GcnModel model(gnn::config_for_graph(graph, *graph.features(), cfg.hidden, cfg.seed));
  gnn::train_pre(model, graph, cfg);
  Matrix logits = gnn::forward(model, graph);
  std::vector<NodeIndex> nodes;
  std::vector<int> truth;
  for (NodeIndex v : graph.target_node_indices()) {
    if (graph.split(v) == which && graph.label(v) != kNoLabel) {
      nodes.push_back(v);
      truth.push_back(graph.label(v));
    }
  }
  if (nodes.empty()) throw ValidationError("train_eval: no labeled nodes in requested split");
  return eval::f1_scores(gnn::predict(logits, nodes), truth, graph.class_count());
}

eval::EvalReport train_eval(const HeteroGraph& g, const gnn::TrainConfig& cfg) {
  return train_eval_split(g, cfg, SplitTag::kTest);
}

CthgeResult run_cthge(const HeteroGraph& g, const gnn::TrainConfig& train_cfg,
                      const PruneConfig& prune_cfg, const RefineConfig& refine_cfg,
                      const PipelineOptions& opts) {
  refine_cfg.validate();
  HeteroGraph graph = g.features() ? g : g.with_features(gnn::synthesize_features(g));

  gnn::GcnModel model(
      gnn::config_for_graph(graph, *graph.features(), train_cfg.hidden, train_cfg.seed));
  gnn::train_pre(model, graph, train_cfg);
  Matrix logits = gnn::forward(model, graph);
  chr::TargetInfoMatrix info = chr::target_info(graph, &logits);

  PipelineReport report;
  report.chr_before = chr::compute_chr(graph, info);

  auto test_nodes_of = [](const HeteroGraph& gr) {
    std::vector<NodeIndex> nodes;
    for (NodeIndex v : gr.target_node_indices()) {
      if (gr.split(v) == SplitTag::kTest && gr.label(v) != kNoLabel) nodes.push_back(v);
    }
    return nodes;
  };
  std::vector<NodeIndex> test_nodes = test_nodes_of(graph);
  if (!test_nodes.empty()) {
    std::vector<int> truth;
    for (NodeIndex v : test_nodes) truth.push_back(graph.label(v));
    eval::EvalReport before = eval::f1_scores(gnn::predict(logits, test_nodes), truth,
                                              graph.class_count());
    report.f1_before_macro = before.macro_f1;
    report.f1_before_micro = before.micro_f1;
  }

  PruneConfig prune = prune_cfg;
  if (opts.auto_tau) {
    gnn::TrainConfig search_cfg = train_cfg;
    search_cfg.epochs = opts.tau_search_epochs;
    const std::vector<double>& grid =
        prune.tau_grid.empty() ? PruneConfig::default_grid() : prune.tau_grid;
    prune.tau = select_tau(graph, info, grid, [&](double, const HeteroGraph& pruned) {
      return train_eval_split(pruned, search_cfg, SplitTag::kVal).macro_f1;
    });
  }
  report.tau = prune.tau;

  EditPlan plan = prune_phase1(graph, info, prune);
  plan = iterative_refine(graph, model, std::move(plan), refine_cfg, train_cfg);

  HeteroGraph edited = graph.with_cross_edges(plan.e_final);
  Matrix final_logits = gnn::forward(model, edited);
  chr::TargetInfoMatrix final_info = chr::target_info(edited, &final_logits);
  report.chr_after = chr::compute_chr(edited, final_info);
  plan.stage_chr.push_back({"final", report.chr_after, plan.e_final.size()});

  if (!test_nodes.empty()) {
    eval::EvalReport after = train_eval(edited, train_cfg);
    report.f1_after_macro = after.macro_f1;
    report.f1_after_micro = after.micro_f1;
  }
  report.stages = plan.stage_chr;

  // Emit the edited graph in the caller's schema: synthesized features
  // stay internal, they never appear in saved files.
  CthgeResult result{g.with_cross_edges(plan.e_final), std::move(plan), std::move(report)};
  return result;
}

}  // namespace edit
}  // namespace cthge
