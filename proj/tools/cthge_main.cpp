// cthge: heterogeneous-graph CHR analysis and editing toolkit.
//
// Subcommands:
//   chr report   per-edge similarity report and the graph's CHR
//   edit         two-phase CTHGE editing with plan/report artifacts
//   bench        synthetic CHR sweep, optionally with editing + ARI
//   theory sweep numerical check of the generalization lower bound
//   synth gen    synthetic heterogeneous graph generator
//   eval run     node-classification harness for the built-in model
//
// Every run writes a config.lock into --out; feeding it back through
// --config reproduces the run byte-for-byte.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cthge/chr.hpp"
#include "cthge/editor.hpp"
#include "cthge/error.hpp"
#include "cthge/eval.hpp"
#include "cthge/hetgraph.hpp"
#include "cthge/hgnn.hpp"
#include "cthge/lockfile.hpp"
#include "cthge/parallel.hpp"
#include "cthge/rng.hpp"
#include "cthge/synth.hpp"
#include "cthge/text.hpp"
#include "cthge/theory.hpp"

namespace fs = std::filesystem;
using namespace cthge;

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  if (csv.empty()) return out;
  for (auto part : split_on(csv, ',')) {
    out.push_back(parse_real(part, "grid"));
  }
  return out;
}

struct GraphArgs {
  std::string dir;
  std::string nodes;
  std::string edges;
  std::string target;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--graph", dir, "graph directory holding nodes.tsv and edges.tsv");
    cmd->add_option("--nodes", nodes, "nodes TSV path (overrides --graph)");
    cmd->add_option("--edges", edges, "edges TSV path (overrides --graph)");
    cmd->add_option("--target", target, "target node type (default: meta.tsv of --graph)");
  }

  HeteroGraph load() {
    if (nodes.empty() && !dir.empty()) nodes = dir + "/nodes.tsv";
    if (edges.empty() && !dir.empty()) edges = dir + "/edges.tsv";
    if (nodes.empty() || edges.empty()) {
      throw ConfigError("provide --graph or both --nodes and --edges");
    }
    if (target.empty() && !dir.empty() && fs::exists(dir + "/meta.tsv")) {
      for (const auto& [k, v] : read_kv_file(dir + "/meta.tsv")) {
        if (k == "target_type") target = v;
      }
    }
    if (target.empty()) throw ConfigError("no --target given and no meta.tsv to infer it from");
    return HeteroGraph::load(nodes, edges, target);
  }
};

void ensure_outdir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::create_directories(out);
}

// Loads per-node logits rows: node_id <TAB> v0,v1,...,v{C-1}.
Matrix load_logits_file(const std::string& path, const HeteroGraph& g) {
  std::size_t classes = static_cast<std::size_t>(g.class_count());
  Matrix logits(g.node_count(), classes);
  std::vector<bool> seen(g.node_count(), false);
  std::string text = read_file(path);
  std::size_t start = 0, lineno = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find('\n', start);
    std::string_view line = pos == std::string::npos
                                ? std::string_view(text).substr(start)
                                : std::string_view(text).substr(start, pos - start);
    ++lineno;
    if (!line.empty()) {
      std::string ctx = path + ":" + std::to_string(lineno);
      auto fields = split_on(line, '\t');
      if (fields.size() != 2) throw ParseError(ctx + ": expected node_id<TAB>values");
      NodeId id = parse_int(fields[0], ctx);
      auto values = split_on(fields[1], ',');
      if (values.size() != classes) {
        throw DimensionError(ctx + ": expected " + std::to_string(classes) + " logit values");
      }
      bool found = false;
      for (NodeIndex i = 0; i < g.node_count(); ++i) {
        if (g.node_id(i) == id) {
          for (std::size_t c = 0; c < classes; ++c) {
            logits.at(i, c) = parse_real(values[c], ctx);
          }
          seen[i] = true;
          found = true;
          break;
        }
      }
      if (!found) throw ValidationError(ctx + ": unknown node id");
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  for (NodeIndex v : g.target_node_indices()) {
    if (g.split(v) != SplitTag::kTrain && !seen[v]) {
      throw ValidationError(path + ": missing logits for unlabeled target node " +
                            std::to_string(g.node_id(v)));
    }
  }
  return logits;
}

struct TrainArgs {
  int epochs = 400;
  int fine_tune_epochs = 200;
  double lr = 5e-4;
  double weight_decay = 1e-4;
  std::size_t hidden = 64;

  void add_to(CLI::App* cmd, bool with_fine_tune) {
    cmd->add_option("--epochs", epochs, "training epochs");
    if (with_fine_tune) {
      cmd->add_option("--fine-tune-epochs", fine_tune_epochs, "fine-tuning epochs per round");
    }
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--weight-decay", weight_decay, "L2 weight decay");
    cmd->add_option("--hidden", hidden, "hidden units");
  }

  gnn::TrainConfig config(std::uint64_t seed) const {
    gnn::TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.fine_tune_epochs = fine_tune_epochs;
    cfg.learning_rate = lr;
    cfg.weight_decay = weight_decay;
    cfg.hidden = hidden;
    cfg.seed = seed;
    return cfg;
  }

  void lock_into(KvEntries& kv, bool with_fine_tune) const {
    kv.emplace_back("epochs", std::to_string(epochs));
    if (with_fine_tune) kv.emplace_back("fine-tune-epochs", std::to_string(fine_tune_epochs));
    kv.emplace_back("lr", fmt_double(lr));
    kv.emplace_back("weight-decay", fmt_double(weight_decay));
    kv.emplace_back("hidden", std::to_string(hidden));
  }
};

void lock_graph_args(KvEntries& kv, const GraphArgs& ga) {
  if (!ga.dir.empty()) kv.emplace_back("graph", ga.dir);
  if (!ga.nodes.empty()) kv.emplace_back("nodes", ga.nodes);
  if (!ga.edges.empty()) kv.emplace_back("edges", ga.edges);
  kv.emplace_back("target", ga.target);
}

int cmd_chr(GraphArgs& ga, const std::string& logits_mode, const TrainArgs& ta,
            std::uint64_t seed, const std::string& out, unsigned threads) {
  ensure_outdir(out);
  HeteroGraph g = ga.load();

  chr::TargetInfoMatrix info;
  if (logits_mode == "none") {
    info = chr::target_info(g, nullptr);
  } else if (logits_mode == "train") {
    HeteroGraph graph = g.features() ? g : g.with_features(gnn::synthesize_features(g));
    gnn::TrainConfig cfg = ta.config(seed);
    gnn::GcnModel model(gnn::config_for_graph(graph, *graph.features(), cfg.hidden, cfg.seed));
    gnn::train_pre(model, graph, cfg);
    Matrix logits = gnn::forward(model, graph);
    info = chr::target_info(graph, &logits);
  } else {
    Matrix logits = load_logits_file(logits_mode, g);
    info = chr::target_info(g, &logits);
  }

  EdgePartition parts = partition_edges(g);
  if (parts.tn.empty()) {
    throw UndefinedMetricError("CHR is undefined: graph has no cross-type edges");
  }
  std::vector<double> sims = chr::edge_similarities(g, info, parts.tn);
  double chr_value = pairwise_sum(sims) / static_cast<double>(sims.size());

  std::string csv = "edge_id,src,dst,similarity\n";
  for (std::size_t i = 0; i < parts.tn.size(); ++i) {
    const Edge& e = g.edge(parts.tn[i]);
    csv += std::to_string(parts.tn[i]);
    csv += ',';
    csv += std::to_string(g.node_id(e.u));
    csv += ',';
    csv += std::to_string(g.node_id(e.v));
    csv += ',';
    csv += fmt_double(sims[i]);
    csv += '\n';
  }
  csv += "CHR," + fmt_double(chr_value) + "\n";
  write_file(out + "/chr_report.csv", csv);

  KvEntries kv;
  lock_graph_args(kv, ga);
  kv.emplace_back("logits", logits_mode);
  if (logits_mode == "train") ta.lock_into(kv, false);
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("threads", std::to_string(threads));
  write_lock(out, std::move(kv));

  std::cout << "CHR," << fmt_double(chr_value) << "\n";
  return 0;
}

int cmd_edit(GraphArgs& ga, const std::string& tau_arg, double alpha, double gamma, double offset,
             int iters, int tau_search_epochs, const TrainArgs& ta, std::uint64_t seed,
             const std::string& out, unsigned threads) {
  ensure_outdir(out);
  HeteroGraph g = ga.load();

  edit::PruneConfig prune;
  prune.tau_grid = edit::PruneConfig::default_grid();
  edit::PipelineOptions opts;
  opts.tau_search_epochs = tau_search_epochs;
  if (tau_arg == "auto") {
    opts.auto_tau = true;
  } else {
    prune.tau = parse_real(tau_arg, "--tau");
  }
  edit::RefineConfig refine;
  refine.alpha = alpha;
  refine.gamma = gamma;
  refine.offset = offset;
  refine.iterations = iters;

  edit::CthgeResult result = edit::run_cthge(g, ta.config(seed), prune, refine, opts);

  result.edited.save(out + "/nodes.tsv", out + "/edges.tsv");
  write_file(out + "/plan.csv", result.plan.plan_csv());
  write_file(out + "/report.csv", result.plan.report_csv());

  std::string f1_csv = "variant,macro_f1,micro_f1\n";
  f1_csv += "origin," + fmt_double(result.report.f1_before_macro) + "," +
            fmt_double(result.report.f1_before_micro) + "\n";
  f1_csv += "cthge," + fmt_double(result.report.f1_after_macro) + "," +
            fmt_double(result.report.f1_after_micro) + "\n";
  write_file(out + "/f1.csv", f1_csv);

  KvEntries kv;
  lock_graph_args(kv, ga);
  kv.emplace_back("tau", tau_arg);
  kv.emplace_back("alpha", fmt_double(alpha));
  kv.emplace_back("gamma", fmt_double(gamma));
  kv.emplace_back("offset", fmt_double(offset));
  kv.emplace_back("iters", std::to_string(iters));
  kv.emplace_back("tau-search-epochs", std::to_string(tau_search_epochs));
  ta.lock_into(kv, true);
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("threads", std::to_string(threads));
  write_lock(out, std::move(kv));

  std::cout << "tau," << fmt_double(result.report.tau) << "\n";
  std::cout << "chr_before," << fmt_double(result.report.chr_before) << "\n";
  std::cout << "chr_after," << fmt_double(result.report.chr_after) << "\n";
  std::cout << "macro_f1_before," << fmt_double(result.report.f1_before_macro) << "\n";
  std::cout << "macro_f1_after," << fmt_double(result.report.f1_after_macro) << "\n";
  return 0;
}

int cmd_bench(const std::string& grid_arg, std::size_t seeds, bool with_edit,
              synth::SynthConfig base, const TrainArgs& ta, int iters, double alpha, double gamma,
              double offset, const std::string& tau_arg, int tau_search_epochs,
              std::uint64_t seed, const std::string& out, unsigned threads) {
  ensure_outdir(out);
  std::vector<double> grid = parse_grid(grid_arg);
  if (grid.empty()) throw ConfigError("--grid must list at least one CHR value");
  if (seeds == 0) throw ConfigError("--seeds must be positive");
  base.seed = seed;

  std::string csv = "target_chr,measured_chr,seed,variant,macro_f1,micro_f1\n";
  std::vector<double> chr_values, origin_macro, cthge_macro, origin_micro, cthge_micro;

  struct Cell {
    double measured = 0.0;
    eval::EvalReport origin;
    eval::EvalReport cthge;
  };
  std::vector<Cell> cells(grid.size() * seeds);

  parallel_for(grid.size() * seeds, threads, [&](std::size_t idx) {
    std::size_t gi = idx / seeds;
    std::size_t si = idx % seeds;
    synth::SynthConfig cfg = base;
    cfg.target_chr = grid[gi];
    cfg.seed = derive_seed(base.seed, gi * 1000 + si);
    synth::SynthGraph sg = synth::generate(cfg);
    Cell& cell = cells[idx];
    cell.measured = synth::oracle_chr(sg);
    gnn::TrainConfig tc = ta.config(derive_seed(seed, idx));
    cell.origin = edit::train_eval(sg.graph, tc);
    if (with_edit) {
      edit::PruneConfig prune;
      prune.tau_grid = edit::PruneConfig::default_grid();
      edit::PipelineOptions opts;
      opts.tau_search_epochs = tau_search_epochs;
      if (tau_arg == "auto") {
        opts.auto_tau = true;
      } else {
        prune.tau = parse_real(tau_arg, "--tau");
      }
      edit::RefineConfig refine;
      refine.alpha = alpha;
      refine.gamma = gamma;
      refine.offset = offset;
      refine.iterations = iters;
      edit::CthgeResult res = edit::run_cthge(sg.graph, tc, prune, refine, opts);
      cell.cthge.macro_f1 = res.report.f1_after_macro;
      cell.cthge.micro_f1 = res.report.f1_after_micro;
    }
  });

  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    std::size_t gi = idx / seeds;
    std::size_t si = idx % seeds;
    const Cell& cell = cells[idx];
    chr_values.push_back(cell.measured);
    origin_macro.push_back(cell.origin.macro_f1);
    origin_micro.push_back(cell.origin.micro_f1);
    csv += fmt_double(grid[gi]) + "," + fmt_double(cell.measured) + "," + std::to_string(si) +
           ",origin," + fmt_double(cell.origin.macro_f1) + "," +
           fmt_double(cell.origin.micro_f1) + "\n";
    if (with_edit) {
      cthge_macro.push_back(cell.cthge.macro_f1);
      cthge_micro.push_back(cell.cthge.micro_f1);
      csv += fmt_double(grid[gi]) + "," + fmt_double(cell.measured) + "," + std::to_string(si) +
             ",cthge," + fmt_double(cell.cthge.macro_f1) + "," +
             fmt_double(cell.cthge.micro_f1) + "\n";
    }
  }

  auto rho = eval::spearman(chr_values, origin_macro);
  std::string rho_text = rho ? fmt_double(*rho) : "undefined";
  csv += "spearman_chr_macro," + rho_text + ",,,,\n";
  if (with_edit) {
    double ari_macro = eval::ari(origin_macro, cthge_macro);
    double ari_micro = eval::ari(origin_micro, cthge_micro);
    csv += "ari_macro," + fmt_double(ari_macro) + ",,,,\n";
    csv += "ari_micro," + fmt_double(ari_micro) + ",,,,\n";
    std::cout << "ari_macro," << fmt_double(ari_macro) << "\n";
  }
  write_file(out + "/metrics.csv", csv);

  KvEntries kv;
  kv.emplace_back("grid", grid_arg);
  kv.emplace_back("seeds", std::to_string(seeds));
  kv.emplace_back("edit", with_edit ? "1" : "0");
  kv.emplace_back("nt", std::to_string(base.n_t));
  kv.emplace_back("nn", std::to_string(base.n_n));
  kv.emplace_back("classes", std::to_string(base.classes));
  kv.emplace_back("tt-edges", std::to_string(base.tt_edges));
  kv.emplace_back("tn-edges", std::to_string(base.tn_edges));
  kv.emplace_back("nn-edges", std::to_string(base.nn_edges));
  kv.emplace_back("noise-edges", std::to_string(base.noise_tn_edges));
  kv.emplace_back("feature-dim", std::to_string(base.feature_dim));
  kv.emplace_back("separation", fmt_double(base.class_separation));
  ta.lock_into(kv, with_edit);
  if (with_edit) {
    kv.emplace_back("tau", tau_arg);
    kv.emplace_back("alpha", fmt_double(alpha));
    kv.emplace_back("gamma", fmt_double(gamma));
    kv.emplace_back("offset", fmt_double(offset));
    kv.emplace_back("iters", std::to_string(iters));
    kv.emplace_back("tau-search-epochs", std::to_string(tau_search_epochs));
  }
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("threads", std::to_string(threads));
  write_lock(out, std::move(kv));

  std::cout << "spearman_chr_macro," << rho_text << "\n";
  return 0;
}

int cmd_theory(double qs, const std::string& qc_grid_arg, std::size_t dim, double mu_scale,
               double sigma0, double sigma1, double lambda, std::int64_t samples,
               std::uint64_t seed, const std::string& out, unsigned threads) {
  ensure_outdir(out);
  std::vector<double> grid = parse_grid(qc_grid_arg);
  if (grid.empty()) throw ConfigError("--qc-grid must list at least one value");

  theory::MixtureSpec spec;
  spec.mu_x0.assign(dim, 0.0);
  spec.mu_x1.assign(dim, mu_scale);
  spec.sigma0 = sigma0;
  spec.sigma1 = sigma1;
  spec.lambda = lambda;
  spec.q_s = qs;
  spec.samples = samples;
  spec.seed = seed;
  spec.w = Matrix(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) spec.w.at(i, i) = 1.0;

  auto rows = theory::empirical_generalization_sweep(spec, grid, threads);
  write_file(out + "/theory.csv", theory::sweep_csv(rows));

  KvEntries kv;
  kv.emplace_back("qs", fmt_double(qs));
  kv.emplace_back("qc-grid", qc_grid_arg);
  kv.emplace_back("dim", std::to_string(dim));
  kv.emplace_back("mu-scale", fmt_double(mu_scale));
  kv.emplace_back("sigma0", fmt_double(sigma0));
  kv.emplace_back("sigma1", fmt_double(sigma1));
  kv.emplace_back("lambda", fmt_double(lambda));
  kv.emplace_back("samples", std::to_string(samples));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("threads", std::to_string(threads));
  write_lock(out, std::move(kv));

  std::cout << "wrote " << out << "/theory.csv (" << rows.size() << " rows)\n";
  return 0;
}

int cmd_synth(synth::SynthConfig cfg, std::uint64_t seed, const std::string& out) {
  ensure_outdir(out);
  cfg.seed = seed;
  synth::SynthGraph sg = synth::generate(cfg);
  sg.graph.save(out + "/nodes.tsv", out + "/edges.tsv");
  write_file(out + "/truth.tsv", synth::truth_tsv(sg));
  write_file(out + "/meta.tsv", std::string("target_type=item\n"));

  KvEntries kv;
  kv.emplace_back("nt", std::to_string(cfg.n_t));
  kv.emplace_back("nn", std::to_string(cfg.n_n));
  kv.emplace_back("classes", std::to_string(cfg.classes));
  kv.emplace_back("target-chr", fmt_double(cfg.target_chr));
  kv.emplace_back("tt-edges", std::to_string(cfg.tt_edges));
  kv.emplace_back("tn-edges", std::to_string(cfg.tn_edges));
  kv.emplace_back("nn-edges", std::to_string(cfg.nn_edges));
  kv.emplace_back("noise-edges", std::to_string(cfg.noise_tn_edges));
  kv.emplace_back("feature-dim", std::to_string(cfg.feature_dim));
  kv.emplace_back("separation", fmt_double(cfg.class_separation));
  kv.emplace_back("seed", std::to_string(seed));
  write_lock(out, std::move(kv));

  std::cout << "nodes," << sg.graph.node_count() << "\n";
  std::cout << "edges," << sg.graph.edge_count() << "\n";
  std::cout << "oracle_chr," << fmt_double(synth::oracle_chr(sg)) << "\n";
  return 0;
}

int cmd_eval(GraphArgs& ga, std::size_t seeds, bool resplit, const TrainArgs& ta,
             std::uint64_t seed, const std::string& out, unsigned threads) {
  ensure_outdir(out);
  HeteroGraph g = ga.load();
  if (resplit) {
    eval::SplitAssignment split = eval::make_split(g, 0.6, 0.2, 0.2, seed);
    g = g.with_splits(split.tags);
  }
  if (seeds == 0) throw ConfigError("--seeds must be positive");

  std::string graph_label = ga.dir.empty() ? "graph" : fs::path(ga.dir).filename().string();
  std::vector<eval::EvalReport> reports(seeds);
  parallel_for(seeds, threads, [&](std::size_t s) {
    reports[s] = edit::train_eval(g, ta.config(derive_seed(seed, s)));
  });

  std::string csv = "model,graph,seed,macro_f1,micro_f1\n";
  for (std::size_t s = 0; s < seeds; ++s) {
    csv += "multi-gcn," + graph_label + "," + std::to_string(s) + "," +
           fmt_double(reports[s].macro_f1) + "," + fmt_double(reports[s].micro_f1) + "\n";
  }
  eval::SeedStats stats = eval::aggregate(reports);
  csv += "aggregate," + graph_label + ",mean," + fmt_double(stats.macro_mean) + "," +
         fmt_double(stats.micro_mean) + "\n";
  csv += "aggregate," + graph_label + ",std," + fmt_double(stats.macro_std) + "," +
         fmt_double(stats.micro_std) + "\n";
  write_file(out + "/metrics.csv", csv);

  KvEntries kv;
  lock_graph_args(kv, ga);
  kv.emplace_back("seeds", std::to_string(seeds));
  kv.emplace_back("resplit", resplit ? "1" : "0");
  ta.lock_into(kv, false);
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("threads", std::to_string(threads));
  write_lock(out, std::move(kv));

  std::cout << "macro_f1," << fmt_double(stats.macro_mean) << "," << fmt_double(stats.macro_std)
            << "\n";
  std::cout << "micro_f1," << fmt_double(stats.micro_mean) << "," << fmt_double(stats.micro_std)
            << "\n";
  return 0;
}

// Splices --config file entries into argv as --key=value for keys not
// already present on the command line.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) return args;
  for (const auto& [key, value] : read_kv_file(config_path)) {
    bool present = false;
    std::string flag = "--" + key;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-type homophily toolkit"};
  app.require_subcommand(1);

  std::string out, config_path;
  std::uint64_t seed = 0;
  int threads_flag = 0;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--seed", seed, "master random seed");
    cmd->add_option("--threads", threads_flag, "worker cap (default CTHGE_THREADS or 1)");
    cmd->add_option("--config", config_path, "key=value file with defaults for any flag");
  };

  GraphArgs graph_args;
  TrainArgs train_args;

  // chr report
  auto* chr_cmd = app.add_subcommand("chr", "cross-type homophily ratio");
  auto* chr_report = chr_cmd->add_subcommand("report", "per-edge similarity and CHR");
  chr_cmd->require_subcommand(1);
  std::string logits_mode = "train";
  graph_args.add_to(chr_report);
  chr_report->add_option("--logits", logits_mode,
                         "'train' (fit built-in model), 'none' (uniform fallback), or a TSV path");
  train_args.add_to(chr_report, false);
  add_common(chr_report);

  // edit
  auto* edit_cmd = app.add_subcommand("edit", "two-phase CTHGE editing");
  std::string tau_arg = "auto";
  double alpha = 0.10, gamma = 0.1, offset = 0.06;
  int iters = 3, tau_search_epochs = 100;
  graph_args.add_to(edit_cmd);
  edit_cmd->add_option("--tau", tau_arg, "similarity threshold in [0,1], or 'auto'");
  edit_cmd->add_option("--alpha", alpha, "recovery/removal ratio");
  edit_cmd->add_option("--gamma", gamma, "gap factor");
  edit_cmd->add_option("--offset", offset, "base offset");
  edit_cmd->add_option("--iters", iters, "refinement rounds");
  edit_cmd->add_option("--tau-search-epochs", tau_search_epochs,
                       "retrain epochs per tau grid point");
  train_args.add_to(edit_cmd, true);
  add_common(edit_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "synthetic CHR sweep and comparisons");
  std::string grid_arg = "0.3,0.5,0.7,0.9";
  std::size_t sweep_seeds = 5;
  bool with_edit = false;
  synth::SynthConfig synth_cfg;
  bench_cmd->add_option("--grid", grid_arg, "comma-separated target CHR values");
  bench_cmd->add_option("--seeds", sweep_seeds, "seeds per grid point");
  bench_cmd->add_flag("--edit", with_edit, "also run CTHGE per graph and report ARI");
  bench_cmd->add_option("--nt", synth_cfg.n_t, "target nodes");
  bench_cmd->add_option("--nn", synth_cfg.n_n, "non-target nodes");
  bench_cmd->add_option("--classes", synth_cfg.classes, "classes");
  bench_cmd->add_option("--tt-edges", synth_cfg.tt_edges, "target-target edges");
  bench_cmd->add_option("--tn-edges", synth_cfg.tn_edges, "cross-type edges");
  bench_cmd->add_option("--nn-edges", synth_cfg.nn_edges, "non-target edges");
  bench_cmd->add_option("--noise-edges", synth_cfg.noise_tn_edges, "planted noisy cross edges");
  bench_cmd->add_option("--feature-dim", synth_cfg.feature_dim, "feature dimension");
  bench_cmd->add_option("--separation", synth_cfg.class_separation, "class mean separation");
  bench_cmd->add_option("--tau", tau_arg, "threshold for --edit runs");
  bench_cmd->add_option("--alpha", alpha, "recovery/removal ratio for --edit runs");
  bench_cmd->add_option("--gamma", gamma, "gap factor for --edit runs");
  bench_cmd->add_option("--offset", offset, "base offset for --edit runs");
  bench_cmd->add_option("--iters", iters, "refinement rounds for --edit runs");
  bench_cmd->add_option("--tau-search-epochs", tau_search_epochs,
                        "retrain epochs per tau grid point");
  train_args.add_to(bench_cmd, true);
  add_common(bench_cmd);

  // theory sweep
  auto* theory_cmd = app.add_subcommand("theory", "generalization bound checks");
  auto* theory_sweep = theory_cmd->add_subcommand("sweep", "empirical DB index vs C_lower");
  theory_cmd->require_subcommand(1);
  double qs = 0.9;
  std::string qc_grid = "0.2,0.4,0.6,0.8,1";
  std::size_t dim = 4;
  double mu_scale = 1.0, sigma0 = 1.0, sigma1 = 1.0, lambda = 0.5;
  std::int64_t samples = 100000;
  theory_sweep->add_option("--qs", qs, "same-type homophily");
  theory_sweep->add_option("--qc-grid", qc_grid, "comma-separated cross-type homophily values");
  theory_sweep->add_option("--dim", dim, "feature dimension");
  theory_sweep->add_option("--mu-scale", mu_scale, "class-mean separation scale");
  theory_sweep->add_option("--sigma0", sigma0, "class-0 covariance scale");
  theory_sweep->add_option("--sigma1", sigma1, "class-1 covariance scale");
  theory_sweep->add_option("--lambda", lambda, "non-target mixture coefficient");
  theory_sweep->add_option("--samples", samples, "Monte-Carlo samples per grid point");
  add_common(theory_sweep);

  // synth gen
  auto* synth_cmd = app.add_subcommand("synth", "synthetic graph generator");
  auto* synth_gen = synth_cmd->add_subcommand("gen", "generate a graph with target CHR");
  synth_cmd->require_subcommand(1);
  synth::SynthConfig gen_cfg;
  synth_gen->add_option("--nt", gen_cfg.n_t, "target nodes");
  synth_gen->add_option("--nn", gen_cfg.n_n, "non-target nodes");
  synth_gen->add_option("--classes", gen_cfg.classes, "classes");
  synth_gen->add_option("--target-chr", gen_cfg.target_chr, "desired oracle CHR");
  synth_gen->add_option("--tt-edges", gen_cfg.tt_edges, "target-target edges");
  synth_gen->add_option("--tn-edges", gen_cfg.tn_edges, "cross-type edges");
  synth_gen->add_option("--nn-edges", gen_cfg.nn_edges, "non-target edges");
  synth_gen->add_option("--noise-edges", gen_cfg.noise_tn_edges, "planted noisy cross edges");
  synth_gen->add_option("--feature-dim", gen_cfg.feature_dim, "feature dimension");
  synth_gen->add_option("--separation", gen_cfg.class_separation, "class mean separation");
  add_common(synth_gen);

  // eval run
  auto* eval_cmd = app.add_subcommand("eval", "node-classification evaluation");
  auto* eval_run = eval_cmd->add_subcommand("run", "train and score the built-in model");
  eval_cmd->require_subcommand(1);
  std::size_t eval_seeds = 5;
  bool resplit = false;
  graph_args.add_to(eval_run);
  eval_run->add_option("--seeds", eval_seeds, "model seeds to average over");
  eval_run->add_flag("--resplit", resplit, "regenerate a stratified 0.6/0.2/0.2 split");
  train_args.add_to(eval_run, false);
  add_common(eval_run);

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<const char*> cargs;
  cargs.push_back(argv[0]);
  for (const auto& a : args) cargs.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  unsigned threads = resolve_threads(threads_flag);
  try {
    if (chr_report->parsed()) {
      return cmd_chr(graph_args, logits_mode, train_args, seed, out, threads);
    }
    if (edit_cmd->parsed()) {
      return cmd_edit(graph_args, tau_arg, alpha, gamma, offset, iters, tau_search_epochs,
                      train_args, seed, out, threads);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(grid_arg, sweep_seeds, with_edit, synth_cfg, train_args, iters, alpha,
                       gamma, offset, tau_arg, tau_search_epochs, seed, out, threads);
    }
    if (theory_sweep->parsed()) {
      return cmd_theory(qs, qc_grid, dim, mu_scale, sigma0, sigma1, lambda, samples, seed, out,
                        threads);
    }
    if (synth_gen->parsed()) {
      return cmd_synth(gen_cfg, seed, out);
    }
    if (eval_run->parsed()) {
      return cmd_eval(graph_args, eval_seeds, resplit, train_args, seed, out, threads);
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PipelineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
