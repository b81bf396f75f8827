#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cthge/csr.hpp"
#include "cthge/hetgraph.hpp"
#include "cthge/matrix.hpp"

namespace cthge {
namespace gnn {

enum class Activation : std::uint8_t { kRelu = 0, kIdentity = 1 };

struct GcnConfig {
  std::size_t feature_dim = 0;
  std::size_t hidden = 64;
  std::size_t classes = 0;
  std::size_t node_types = 0;
  std::size_t edge_types = 0;
  Activation activation = Activation::kRelu;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  int epochs = 400;
  int fine_tune_epochs = 200;
  double learning_rate = 5e-4;
  double weight_decay = 1e-4;
  std::size_t hidden = 64;
  std::uint64_t seed = 0;
};

// Two relation-aware graph convolutions over symmetric-normalized
// per-edge-type adjacency, between a per-node-type input projection
// and a linear classifier head:
//
//   X0 = type_proj[phi(v)] applied row-wise
//   Xl = act(X_{l-1} Wl_self + sum_r A_r X_{l-1} Wl_rel[r] + bl)
//   logits = X2 Whead + bhead
class GcnModel {
 public:
  GcnModel() = default;
  explicit GcnModel(const GcnConfig& cfg);

  const GcnConfig& config() const { return cfg_; }

  // Parameter tensors in a fixed enumeration order (projections,
  // layer 1, layer 2, head). Gradients and optimizer state use the
  // same order.
  std::vector<Matrix*> params();
  std::vector<const Matrix*> params() const;
  std::vector<std::string> param_names() const;

  std::vector<Matrix> type_proj;        // node_types x (feature_dim x hidden)
  Matrix w1_self, w2_self;              // hidden x hidden
  std::vector<Matrix> w1_rel, w2_rel;   // edge_types x (hidden x hidden)
  Matrix b1, b2;                        // 1 x hidden
  Matrix w_head;                        // hidden x classes
  Matrix b_head;                        // 1 x classes

  // Adam accumulators, parallel to params().
  std::vector<Matrix> adam_m, adam_v;
  std::int64_t adam_step = 0;

  void save(const std::string& path) const;
  static GcnModel load(const std::string& path);

 private:
  GcnConfig cfg_;
};

// Symmetric-normalized adjacency per edge type, shared by forward and
// backward passes over one graph.
struct RelAdjacency {
  std::vector<Csr> per_type;  // node_count x node_count each
};

RelAdjacency build_rel_adjacency(const HeteroGraph& g);

// Per-type one-hot degree-bucket features (16 log-spaced buckets) for
// graphs that ship without a feature matrix.
Matrix synthesize_features(const HeteroGraph& g);

// Returns g's features, or the synthesized fallback.
Matrix model_features(const HeteroGraph& g);

struct ForwardTrace {
  Matrix x0, z1, x1, z2, x2, logits;
};

ForwardTrace forward_trace(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                           const Matrix& features);

// Convenience single-shot forward: builds adjacency and features
// internally. Returns node_count x classes logits.
Matrix forward(const GcnModel& model, const HeteroGraph& g);

// A supervised node: (node index, class id).
using Example = std::pair<NodeIndex, int>;

struct Gradients {
  std::vector<Matrix> tensors;  // parallel to GcnModel::params()
};

// Mean cross-entropy over `batch` plus exact analytic gradients.
double loss_and_gradients(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                          const Matrix& features, const std::vector<Example>& batch,
                          Gradients* grads);

// Forward-only loss (used by finite differences and monitoring).
double batch_loss(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                  const Matrix& features, const std::vector<Example>& batch);

// One Adam step with decoupled-from-loss L2 (gradient += wd * theta).
void adam_step(GcnModel& model, const Gradients& grads, const TrainConfig& cfg);

// Plain gradient-descent step, used by convergence property tests.
void gd_step(GcnModel& model, const Gradients& grads, double lr);

struct TrainResult {
  double final_loss = 0.0;
  int epochs_run = 0;
};

// Supervised pretraining on labeled train-split target nodes.
TrainResult train_pre(GcnModel& model, const HeteroGraph& g, const TrainConfig& cfg);

// Fine-tuning on pseudo-labeled non-target nodes; an empty set skips
// with a warning instead of failing.
TrainResult fine_tune(GcnModel& model, const HeteroGraph& g, const std::vector<Example>& pseudo,
                      const TrainConfig& cfg);

// Max relative error between analytic and central finite-difference
// gradients at `probe_count` randomly chosen parameters.
double gradient_check(const GcnModel& model, const HeteroGraph& g, int probe_count,
                      std::uint64_t seed, double step = 1e-5);

// argmax per row; ties break toward the lower class id.
std::vector<int> predict(const Matrix& logits, const std::vector<NodeIndex>& nodes);

GcnConfig config_for_graph(const HeteroGraph& g, const Matrix& features, std::size_t hidden,
                           std::uint64_t seed);

}  // namespace gnn
}  // namespace cthge
