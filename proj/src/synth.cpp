#include "cthge/synth.hpp"

#include <algorithm>
#include <cmath>

#include "cthge/error.hpp"
#include "cthge/rng.hpp"
#include "cthge/text.hpp"

namespace cthge {
namespace synth {

namespace {

constexpr const char* kTargetType = "item";
constexpr const char* kOtherType = "tag";

// Balanced class assignment: round-robin over a shuffled node order.
std::vector<int> balanced_classes(std::size_t n, int classes, RandomStream& rng) {
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  rng.shuffle(out);
  return out;
}

// Probability that a uniformly chosen cross pair is class-consistent.
double random_pair_consistency(const std::vector<int>& t_classes,
                               const std::vector<int>& n_classes, int classes) {
  std::vector<double> t_frac(static_cast<std::size_t>(classes), 0.0);
  std::vector<double> n_frac(static_cast<std::size_t>(classes), 0.0);
  for (int c : t_classes) t_frac[static_cast<std::size_t>(c)] += 1.0;
  for (int c : n_classes) n_frac[static_cast<std::size_t>(c)] += 1.0;
  double q = 0.0;
  for (int c = 0; c < classes; ++c) {
    q += (t_frac[static_cast<std::size_t>(c)] / static_cast<double>(t_classes.size())) *
         (n_frac[static_cast<std::size_t>(c)] / static_cast<double>(n_classes.size()));
  }
  return q;
}

}  // namespace

SynthGraph generate(const SynthConfig& cfg) {
  if (cfg.n_t == 0 || cfg.n_n == 0 || cfg.classes < 2 || cfg.tn_edges == 0) {
    throw ConfigError("synth: need n_t, n_n, tn_edges > 0 and classes >= 2");
  }
  if (cfg.target_chr < 0.0 || cfg.target_chr > 1.0) {
    throw ConfigError("synth: target_chr must lie in [0, 1]");
  }
  if (cfg.feature_dim == 0) throw ConfigError("synth: feature_dim must be positive");

  RandomStream rng(derive_seed(cfg.seed, 0x57e9));
  std::vector<int> t_classes = balanced_classes(cfg.n_t, cfg.classes, rng);
  std::vector<int> n_classes = balanced_classes(cfg.n_n, cfg.classes, rng);

  // Nodes of each latent class, for consistent/inconsistent draws.
  std::vector<std::vector<std::uint32_t>> n_by_class(static_cast<std::size_t>(cfg.classes));
  for (std::uint32_t i = 0; i < cfg.n_n; ++i) {
    n_by_class[static_cast<std::size_t>(n_classes[i])].push_back(i);
  }
  for (int c = 0; c < cfg.classes; ++c) {
    if (n_by_class[static_cast<std::size_t>(c)].empty()) {
      throw ConfigError("synth: a latent class has no non-target nodes; raise n_n");
    }
  }

  double q = random_pair_consistency(t_classes, n_classes, cfg.classes);
  if (cfg.target_chr < q - 1e-12) {
    throw ConfigError("synth: target_chr " + fmt_double(cfg.target_chr) +
                      " is below the random-pairing baseline; achievable range is [" +
                      fmt_double(q) + ", 1]");
  }
  double rho = q >= 1.0 ? 1.0 : std::clamp((cfg.target_chr - q) / (1.0 - q), 0.0, 1.0);

  HeteroGraph::Parts parts;
  parts.node_type_names = {kTargetType, kOtherType};
  parts.edge_type_names = {"item-item", "item-tag", "tag-tag"};
  parts.target_type_name = kTargetType;

  std::size_t n_total = cfg.n_t + cfg.n_n;
  Matrix features(n_total, cfg.feature_dim);
  for (std::size_t i = 0; i < cfg.n_t; ++i) {
    parts.node_ids.push_back(static_cast<NodeId>(i));
    parts.node_types.push_back(0);
    parts.labels.push_back(t_classes[i]);
    parts.splits.push_back(SplitTag::kNone);
  }
  for (std::size_t i = 0; i < cfg.n_n; ++i) {
    parts.node_ids.push_back(static_cast<NodeId>(cfg.n_t + i));
    parts.node_types.push_back(1);
    parts.labels.push_back(kNoLabel);
    parts.splits.push_back(SplitTag::kNone);
  }

  // Class-mean Gaussian features; class c points along axis c mod dim.
  auto draw_features = [&](std::size_t row, int cls) {
    for (std::size_t j = 0; j < cfg.feature_dim; ++j) {
      double mean = (j == static_cast<std::size_t>(cls) % cfg.feature_dim)
                        ? cfg.class_separation
                        : 0.0;
      features.at(row, j) = rng.normal(mean, 1.0);
    }
  };
  for (std::size_t i = 0; i < cfg.n_t; ++i) draw_features(i, t_classes[i]);
  for (std::size_t i = 0; i < cfg.n_n; ++i) draw_features(cfg.n_t + i, n_classes[i]);
  parts.features = std::move(features);

  auto rand_node = [&](std::size_t count) {
    return static_cast<std::uint32_t>(rng.uniform_below(count));
  };

  for (std::size_t e = 0; e < cfg.tt_edges; ++e) {
    std::uint32_t u = rand_node(cfg.n_t);
    std::uint32_t v = rand_node(cfg.n_t);
    while (cfg.n_t > 1 && v == u) v = rand_node(cfg.n_t);
    parts.edges.push_back({u, v, 0, 1.0});
  }
  for (std::size_t e = 0; e < cfg.tn_edges; ++e) {
    std::uint32_t t = rand_node(cfg.n_t);
    std::uint32_t n;
    if (rng.bernoulli(rho)) {
      const auto& pool = n_by_class[static_cast<std::size_t>(t_classes[t])];
      n = pool[rng.uniform_below(pool.size())];
    } else {
      n = rand_node(cfg.n_n);
    }
    parts.edges.push_back({t, static_cast<std::uint32_t>(cfg.n_t) + n, 1, 1.0});
  }
  for (std::size_t e = 0; e < cfg.noise_tn_edges; ++e) {
    std::uint32_t t = rand_node(cfg.n_t);
    std::uint32_t n = rand_node(cfg.n_n);
    while (n_classes[n] == t_classes[t]) n = rand_node(cfg.n_n);
    parts.edges.push_back({t, static_cast<std::uint32_t>(cfg.n_t) + n, 1, 1.0});
  }
  for (std::size_t e = 0; e < cfg.nn_edges; ++e) {
    std::uint32_t u = rand_node(cfg.n_n);
    std::uint32_t v = rand_node(cfg.n_n);
    while (cfg.n_n > 1 && v == u) v = rand_node(cfg.n_n);
    parts.edges.push_back({static_cast<std::uint32_t>(cfg.n_t) + u,
                           static_cast<std::uint32_t>(cfg.n_t) + v, 2, 1.0});
  }

  SynthGraph sg{HeteroGraph::from_parts(std::move(parts)), std::move(n_classes)};

  eval::SplitAssignment split = eval::make_split(sg.graph, cfg.train_ratio, cfg.val_ratio,
                                                 cfg.test_ratio, derive_seed(cfg.seed, 0x59117));
  sg.graph = sg.graph.with_splits(split.tags);
  return sg;
}

chr::TargetInfoMatrix oracle_info(const SynthGraph& sg) {
  return chr::onehot_target_info(sg.graph, sg.nontarget_classes);
}

double oracle_chr(const SynthGraph& sg) {
  chr::TargetInfoMatrix info = oracle_info(sg);
  return chr::compute_chr(sg.graph, info);
}

std::string truth_tsv(const SynthGraph& sg) {
  CrossTypeView view = cross_view(sg.graph);
  std::string out;
  for (std::size_t i = 0; i < view.n_n; ++i) {
    out += std::to_string(sg.graph.node_id(view.nontarget_nodes[i]));
    out += '\t';
    out += std::to_string(sg.nontarget_classes[i]);
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> chr_sweep(const SynthConfig& base_cfg, const std::vector<double>& chr_grid,
                                std::size_t seeds, const Trainer& trainer) {
  if (chr_grid.empty()) throw ConfigError("chr_sweep: empty grid");
  if (seeds == 0) throw ConfigError("chr_sweep: need at least one seed");
  std::vector<SweepRow> rows;
  for (std::size_t gi = 0; gi < chr_grid.size(); ++gi) {
    for (std::size_t si = 0; si < seeds; ++si) {
      SynthConfig cfg = base_cfg;
      cfg.target_chr = chr_grid[gi];
      cfg.seed = derive_seed(base_cfg.seed, gi * 1000 + si);
      SynthGraph sg = generate(cfg);
      eval::EvalReport rep = trainer(sg.graph);
      rows.push_back({chr_grid[gi], oracle_chr(sg), cfg.seed, rep.macro_f1, rep.micro_f1});
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "target_chr,measured_chr,seed,macro_f1,micro_f1\n";
  for (const SweepRow& r : rows) {
    out += fmt_double(r.target_chr);
    out += ',';
    out += fmt_double(r.measured_chr);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += fmt_double(r.macro_f1);
    out += ',';
    out += fmt_double(r.micro_f1);
    out += '\n';
  }
  return out;
}

}  // namespace synth
}  // namespace cthge
