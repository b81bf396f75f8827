#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cthge/chr.hpp"
#include "cthge/eval.hpp"
#include "cthge/hetgraph.hpp"

namespace cthge {
namespace synth {

struct SynthConfig {
  std::size_t n_t = 500;
  std::size_t n_n = 500;
  int classes = 4;
  double target_chr = 0.7;
  std::size_t tt_edges = 200;
  std::size_t tn_edges = 3000;
  std::size_t nn_edges = 200;
  // Extra class-inconsistent cross edges planted on top of the
  // tn_edges drawn at target_chr; used to build noisy fixtures.
  std::size_t noise_tn_edges = 0;
  std::size_t feature_dim = 8;
  double class_separation = 1.0;
  double train_ratio = 0.6, val_ratio = 0.2, test_ratio = 0.2;
  std::uint64_t seed = 0;
};

struct SynthGraph {
  HeteroGraph graph;
  std::vector<int> nontarget_classes;  // planted truth, by non-target ordinal
};

// Generates a two-type graph whose expected oracle CHR (one-hot truth
// on both sides) equals cfg.target_chr: each cross edge picks a
// class-consistent partner with probability rho and a uniformly random
// one otherwise, with rho solved from the class counts. Throws
// ConfigError with the achievable range when target_chr is below the
// random-pairing baseline.
SynthGraph generate(const SynthConfig& cfg);

// Oracle target-information matrix from the planted classes.
chr::TargetInfoMatrix oracle_info(const SynthGraph& sg);

// CHR of the generated graph measured with the planted one-hot truth.
double oracle_chr(const SynthGraph& sg);

std::string truth_tsv(const SynthGraph& sg);

struct SweepRow {
  double target_chr = 0.0;
  double measured_chr = 0.0;
  std::uint64_t seed = 0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
};

using Trainer = std::function<eval::EvalReport(const HeteroGraph&)>;

// For every (grid value, seed) pair: generate a graph from the shared
// seed family, train via `trainer`, and tabulate F1 against the
// planted CHR.
std::vector<SweepRow> chr_sweep(const SynthConfig& base_cfg, const std::vector<double>& chr_grid,
                                std::size_t seeds, const Trainer& trainer);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace synth
}  // namespace cthge
