#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cthge/chr.hpp"
#include "cthge/eval.hpp"
#include "cthge/hetgraph.hpp"
#include "cthge/hgnn.hpp"

namespace cthge {
namespace edit {

struct PruneConfig {
  double tau = 0.3;
  std::vector<double> tau_grid;  // defaults to 0.00 .. 1.00 step 0.05

  static std::vector<double> default_grid();
};

struct RefineConfig {
  double alpha = 0.10;
  double gamma = 0.1;
  double offset = 0.06;
  int iterations = 3;

  void validate() const;
  // Effective recovery/removal ratio used in round r (1-based):
  // offset + r * gamma * alpha, clamped to [0, 0.5).
  double round_ratio(int round) const;
};

enum class EdgeAction : std::uint8_t { kKeep, kPrune, kRecover, kRemove };
const char* action_name(EdgeAction a);

struct EdgeRecord {
  EdgeId edge;
  std::string stage;
  double similarity;
  double percentile;  // -1 when not ranked at this stage
  EdgeAction action;
};

struct StageChr {
  std::string stage;
  double chr;
  std::size_t e_tn;
};

// Audit trail of one full edit. Edge ids refer to the *original*
// graph's canonical edge array.
struct EditPlan {
  std::vector<EdgeId> e_tn;     // full cross-type universe
  std::vector<EdgeId> e_prune;  // survivors of Phase I
  std::vector<EdgeId> e_cand;   // Phase-I-removed candidates
  std::vector<EdgeId> e_rec;    // recovered from e_cand
  std::vector<EdgeId> e_rem;    // removed from e_prune
  std::vector<EdgeId> e_final;
  std::vector<StageChr> stage_chr;
  std::vector<EdgeRecord> records;
  double tau = 0.0;
  bool aborted = false;

  std::string plan_csv() const;
  std::string report_csv() const;
};

struct PseudoLabelState {
  Matrix p0;                       // n_n x classes label-count propagation
  std::vector<double> margins;     // per non-target ordinal
  std::vector<NodeIndex> confident_set;
  std::map<NodeIndex, int> pseudo_labels;
};

// Phase I: keep cross edges whose target-information similarity is at
// least tau. Throws PruneError when nothing survives.
EditPlan prune_phase1(const HeteroGraph& g, const chr::TargetInfoMatrix& info,
                      const PruneConfig& cfg);

// Grid search for tau: maximizes the validation score returned by
// `validation_eval` over feasible grid points; ties go to the smaller
// tau. Grid points where pruning empties the cross edge set are
// skipped; if all fail, throws SearchError.
double select_tau(const HeteroGraph& g, const chr::TargetInfoMatrix& info,
                  const std::vector<double>& grid,
                  const std::function<double(double, const HeteroGraph&)>& validation_eval);

// Label-count propagation P0 = A_nt L0 over the current cross edges
// (L0 = one-hot train labels), margin DP0 = max - second max, and the
// confident-node rule DP0 > |unlabeled target neighbors|.
PseudoLabelState propagate_pseudo(const HeteroGraph& g);

// S_soft for one cross edge: softmax of the non-target node's logits
// dotted with the target node's label row (one-hot ground truth for
// train nodes, one-hot model prediction otherwise).
double soft_similarity(const Matrix& logits, const HeteroGraph& g, NodeIndex non_target,
                       NodeIndex target);

std::vector<double> soft_scores(const Matrix& logits, const HeteroGraph& g,
                                const std::vector<EdgeId>& edges);

// Percentile of each score: fraction of edges with a strictly greater
// score. Ties share a percentile.
std::vector<double> score_percentiles(const std::vector<double>& scores);

struct RefineOutcome {
  std::vector<EdgeId> active;      // new retained set
  std::vector<EdgeId> recovered;   // this call's recoveries
  std::vector<EdgeId> removed;     // this call's removals
  std::vector<double> percentiles; // parallel to the edge universe
};

// One recovery/removal pass at ratio alpha over the (active, inactive)
// split of the cross-edge universe. `scores` is parallel to `universe`.
RefineOutcome rank_and_refine(const std::vector<EdgeId>& universe,
                              const std::vector<EdgeId>& active,
                              const std::vector<double>& scores, double alpha);

// Multi-round refinement: each round re-trains on the current edge set,
// recomputes pseudo-labels and soft scores, and applies rank_and_refine
// at the round's ratio. Model divergence aborts with the last good plan.
EditPlan iterative_refine(const HeteroGraph& g, gnn::GcnModel& model, EditPlan plan,
                          const RefineConfig& cfg, const gnn::TrainConfig& train_cfg);

struct PipelineOptions {
  bool auto_tau = false;
  int tau_search_epochs = 100;
};

struct PipelineReport {
  std::vector<StageChr> stages;
  double tau = 0.0;
  double f1_before_macro = 0.0, f1_before_micro = 0.0;
  double f1_after_macro = 0.0, f1_after_micro = 0.0;
  double chr_before = 0.0, chr_after = 0.0;
};

struct CthgeResult {
  HeteroGraph edited;
  EditPlan plan;
  PipelineReport report;
};

// Full two-phase pipeline: pretrain, build H, Phase I prune (fixed or
// searched tau), pseudo-labels + fine-tune, iterative refinement, and
// final graph assembly with before/after CHR and test F1.
CthgeResult run_cthge(const HeteroGraph& g, const gnn::TrainConfig& train_cfg,
                      const PruneConfig& prune_cfg, const RefineConfig& refine_cfg,
                      const PipelineOptions& opts = {});

// Trains a fresh model on g and evaluates F1 on the test split.
eval::EvalReport train_eval(const HeteroGraph& g, const gnn::TrainConfig& cfg);

// Same, but scoring an arbitrary split (validation for tau search).
eval::EvalReport train_eval_split(const HeteroGraph& g, const gnn::TrainConfig& cfg,
                                  SplitTag which);

}  // namespace edit
}  // namespace cthge
