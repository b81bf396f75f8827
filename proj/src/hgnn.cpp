#include "cthge/hgnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include "cthge/error.hpp"
#include "cthge/rng.hpp"

namespace cthge {
namespace gnn {

namespace {

void glorot_init(Matrix& m, RandomStream& rng) {
  double s = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
  for (double& v : m.data) v = rng.uniform(-s, s);
}

void apply_activation(const Matrix& z, Matrix& x, Activation act) {
  x = z;
  if (act == Activation::kRelu) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
  }
}

// dz = dx o act'(z), in place on dx.
void activation_backward(const Matrix& z, Matrix& dx, Activation act) {
  if (act == Activation::kRelu) {
    for (std::size_t i = 0; i < z.data.size(); ++i) {
      if (z.data[i] <= 0.0) dx.data[i] = 0.0;
    }
  }
}

}  // namespace

GcnModel::GcnModel(const GcnConfig& cfg) : cfg_(cfg) {
  if (cfg.feature_dim == 0 || cfg.hidden == 0 || cfg.classes < 2 || cfg.node_types == 0) {
    throw ConfigError("GcnModel: feature_dim, hidden, node_types must be positive and classes >= 2");
  }
  type_proj.assign(cfg.node_types, Matrix(cfg.feature_dim, cfg.hidden));
  w1_self = Matrix(cfg.hidden, cfg.hidden);
  w2_self = Matrix(cfg.hidden, cfg.hidden);
  w1_rel.assign(cfg.edge_types, Matrix(cfg.hidden, cfg.hidden));
  w2_rel.assign(cfg.edge_types, Matrix(cfg.hidden, cfg.hidden));
  b1 = Matrix(1, cfg.hidden);
  b2 = Matrix(1, cfg.hidden);
  w_head = Matrix(cfg.hidden, cfg.classes);
  b_head = Matrix(1, cfg.classes);

  RandomStream rng(derive_seed(cfg.seed, 0x6d0de1));
  for (Matrix* p : params()) {
    if (p->rows == 1 && (p == &b1 || p == &b2 || p == &b_head)) continue;  // biases start at zero
    glorot_init(*p, rng);
  }

  adam_m.clear();
  adam_v.clear();
  for (Matrix* p : params()) {
    adam_m.emplace_back(p->rows, p->cols);
    adam_v.emplace_back(p->rows, p->cols);
  }
  adam_step = 0;
}

std::vector<Matrix*> GcnModel::params() {
  std::vector<Matrix*> out;
  for (auto& m : type_proj) out.push_back(&m);
  out.push_back(&w1_self);
  for (auto& m : w1_rel) out.push_back(&m);
  out.push_back(&b1);
  out.push_back(&w2_self);
  for (auto& m : w2_rel) out.push_back(&m);
  out.push_back(&b2);
  out.push_back(&w_head);
  out.push_back(&b_head);
  return out;
}

std::vector<const Matrix*> GcnModel::params() const {
  std::vector<const Matrix*> out;
  for (const auto& m : type_proj) out.push_back(&m);
  out.push_back(&w1_self);
  for (const auto& m : w1_rel) out.push_back(&m);
  out.push_back(&b1);
  out.push_back(&w2_self);
  for (const auto& m : w2_rel) out.push_back(&m);
  out.push_back(&b2);
  out.push_back(&w_head);
  out.push_back(&b_head);
  return out;
}

std::vector<std::string> GcnModel::param_names() const {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < type_proj.size(); ++t) out.push_back("proj" + std::to_string(t));
  out.push_back("w1_self");
  for (std::size_t r = 0; r < w1_rel.size(); ++r) out.push_back("w1_rel" + std::to_string(r));
  out.push_back("b1");
  out.push_back("w2_self");
  for (std::size_t r = 0; r < w2_rel.size(); ++r) out.push_back("w2_rel" + std::to_string(r));
  out.push_back("b2");
  out.push_back("w_head");
  out.push_back("b_head");
  return out;
}

RelAdjacency build_rel_adjacency(const HeteroGraph& g) {
  RelAdjacency adj;
  std::size_t n = g.node_count();
  std::size_t r_count = g.edge_type_count();
  std::vector<std::vector<double>> degree(r_count, std::vector<double>(n, 0.0));
  for (const Edge& e : g.edges()) {
    degree[e.type][e.u] += e.weight;
    if (e.v != e.u) degree[e.type][e.v] += e.weight;
  }
  std::vector<std::vector<Csr::Entry>> entries(r_count);
  for (const Edge& e : g.edges()) {
    double du = degree[e.type][e.u];
    double dv = degree[e.type][e.v];
    double norm = (du > 0.0 && dv > 0.0) ? e.weight / std::sqrt(du * dv) : 0.0;
    entries[e.type].push_back({e.u, e.v, norm});
    if (e.v != e.u) entries[e.type].push_back({e.v, e.u, norm});
  }
  adj.per_type.reserve(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    adj.per_type.push_back(Csr::from_entries(n, n, std::move(entries[r])));
  }
  return adj;
}

Matrix synthesize_features(const HeteroGraph& g) {
  constexpr std::size_t kBuckets = 16;
  std::size_t types = g.node_type_count();
  Matrix feats(g.node_count(), kBuckets * types);
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    double d = static_cast<double>(g.degree(i));
    std::size_t bucket = std::min<std::size_t>(
        kBuckets - 1, static_cast<std::size_t>(std::floor(std::log2(d + 1.0))));
    feats.at(i, kBuckets * g.node_type(i) + bucket) = 1.0;
  }
  return feats;
}

Matrix model_features(const HeteroGraph& g) {
  if (g.features()) return *g.features();
  return synthesize_features(g);
}

namespace {

void check_shapes(const GcnModel& model, const HeteroGraph& g, const Matrix& features) {
  const GcnConfig& cfg = model.config();
  if (features.rows != g.node_count() || features.cols != cfg.feature_dim) {
    throw DimensionError("forward: feature matrix shape does not match model config");
  }
  if (g.node_type_count() != cfg.node_types || g.edge_type_count() != cfg.edge_types) {
    throw DimensionError("forward: graph type counts do not match model config");
  }
}

// x0 = row-wise type-specific projection of the input features.
Matrix project_features(const GcnModel& model, const HeteroGraph& g, const Matrix& features) {
  Matrix x0(g.node_count(), model.config().hidden);
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    const Matrix& proj = model.type_proj[g.node_type(i)];
    const double* frow = features.row(i);
    double* orow = x0.row(i);
    for (std::size_t f = 0; f < features.cols; ++f) {
      double xf = frow[f];
      if (xf == 0.0) continue;
      const double* prow = proj.row(f);
      for (std::size_t h = 0; h < proj.cols; ++h) orow[h] += xf * prow[h];
    }
  }
  return x0;
}

// z = x W_self + sum_r A_r x W_rel[r] + b
Matrix conv_layer(const RelAdjacency& adj, const Matrix& x, const Matrix& w_self,
                  const std::vector<Matrix>& w_rel, const Matrix& bias) {
  Matrix z;
  matmul(x, w_self, z);
  Matrix agg;
  for (std::size_t r = 0; r < w_rel.size(); ++r) {
    adj.per_type[r].multiply(x, agg);
    matmul_add(agg, w_rel[r], z);
  }
  add_row_broadcast(z, bias);
  return z;
}

}  // namespace

ForwardTrace forward_trace(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                           const Matrix& features) {
  check_shapes(model, g, features);
  Activation act = model.config().activation;
  ForwardTrace t;
  t.x0 = project_features(model, g, features);
  t.z1 = conv_layer(adj, t.x0, model.w1_self, model.w1_rel, model.b1);
  apply_activation(t.z1, t.x1, act);
  t.z2 = conv_layer(adj, t.x1, model.w2_self, model.w2_rel, model.b2);
  apply_activation(t.z2, t.x2, act);
  matmul(t.x2, model.w_head, t.logits);
  add_row_broadcast(t.logits, model.b_head);
  return t;
}

Matrix forward(const GcnModel& model, const HeteroGraph& g) {
  RelAdjacency adj = build_rel_adjacency(g);
  Matrix features = model_features(g);
  return forward_trace(model, g, adj, features).logits;
}

namespace {

double cross_entropy(const Matrix& logits, const std::vector<Example>& batch, Matrix* dlogits) {
  if (dlogits) *dlogits = Matrix(logits.rows, logits.cols);
  double loss = 0.0;
  double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& [node, label] : batch) {
    const double* row = logits.row(node);
    std::size_t c = logits.cols;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
    double lse = mx + std::log(sum);
    loss += lse - row[static_cast<std::size_t>(label)];
    if (dlogits) {
      double* drow = dlogits->row(node);
      for (std::size_t j = 0; j < c; ++j) {
        drow[j] += std::exp(row[j] - lse) * inv_b;
      }
      drow[static_cast<std::size_t>(label)] -= inv_b;
    }
  }
  return loss * inv_b;
}

void validate_batch(const HeteroGraph& g, const std::vector<Example>& batch, std::size_t classes) {
  for (const auto& [node, label] : batch) {
    if (node >= g.node_count() || label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ValidationError("training example out of range");
    }
  }
}

}  // namespace

double batch_loss(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                  const Matrix& features, const std::vector<Example>& batch) {
  ForwardTrace t = forward_trace(model, g, adj, features);
  return cross_entropy(t.logits, batch, nullptr);
}

double loss_and_gradients(const GcnModel& model, const HeteroGraph& g, const RelAdjacency& adj,
                          const Matrix& features, const std::vector<Example>& batch,
                          Gradients* grads) {
  if (batch.empty()) throw ValidationError("loss_and_gradients: empty batch");
  validate_batch(g, batch, model.config().classes);
  ForwardTrace t = forward_trace(model, g, adj, features);
  Matrix dlogits;
  double loss = cross_entropy(t.logits, batch, &dlogits);
  if (!grads) return loss;

  const GcnConfig& cfg = model.config();
  Activation act = cfg.activation;
  std::size_t r_count = cfg.edge_types;

  Matrix d_whead, d_bhead, dx2;
  matmul_at(t.x2, dlogits, d_whead);
  column_sums(dlogits, d_bhead);
  matmul_bt(dlogits, model.w_head, dx2);

  // Layer 2.
  Matrix dz2 = std::move(dx2);
  activation_backward(t.z2, dz2, act);
  Matrix d_w2self, d_b2, dx1;
  matmul_at(t.x1, dz2, d_w2self);
  column_sums(dz2, d_b2);
  matmul_bt(dz2, model.w2_self, dx1);
  std::vector<Matrix> d_w2rel(r_count);
  Matrix spread;
  for (std::size_t r = 0; r < r_count; ++r) {
    adj.per_type[r].multiply(dz2, spread);  // A_r symmetric
    matmul_at(t.x1, spread, d_w2rel[r]);
    Matrix dx1_r;
    matmul_bt(spread, model.w2_rel[r], dx1_r);
    add_inplace(dx1, dx1_r);
  }

  // Layer 1.
  Matrix dz1 = std::move(dx1);
  activation_backward(t.z1, dz1, act);
  Matrix d_w1self, d_b1, dx0;
  matmul_at(t.x0, dz1, d_w1self);
  column_sums(dz1, d_b1);
  matmul_bt(dz1, model.w1_self, dx0);
  std::vector<Matrix> d_w1rel(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    adj.per_type[r].multiply(dz1, spread);
    matmul_at(t.x0, spread, d_w1rel[r]);
    Matrix dx0_r;
    matmul_bt(spread, model.w1_rel[r], dx0_r);
    add_inplace(dx0, dx0_r);
  }

  // Input projections.
  std::vector<Matrix> d_proj(cfg.node_types, Matrix(cfg.feature_dim, cfg.hidden));
  for (NodeIndex i = 0; i < g.node_count(); ++i) {
    Matrix& dp = d_proj[g.node_type(i)];
    const double* frow = features.row(i);
    const double* drow = dx0.row(i);
    for (std::size_t f = 0; f < features.cols; ++f) {
      double xf = frow[f];
      if (xf == 0.0) continue;
      double* prow = dp.row(f);
      for (std::size_t h = 0; h < cfg.hidden; ++h) prow[h] += xf * drow[h];
    }
  }

  grads->tensors.clear();
  for (auto& m : d_proj) grads->tensors.push_back(std::move(m));
  grads->tensors.push_back(std::move(d_w1self));
  for (auto& m : d_w1rel) grads->tensors.push_back(std::move(m));
  grads->tensors.push_back(std::move(d_b1));
  grads->tensors.push_back(std::move(d_w2self));
  for (auto& m : d_w2rel) grads->tensors.push_back(std::move(m));
  grads->tensors.push_back(std::move(d_b2));
  grads->tensors.push_back(std::move(d_whead));
  grads->tensors.push_back(std::move(d_bhead));
  return loss;
}

void adam_step(GcnModel& model, const Gradients& grads, const TrainConfig& cfg) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  auto params = model.params();
  if (grads.tensors.size() != params.size()) {
    throw DimensionError("adam_step: gradient tensor count mismatch");
  }
  model.adam_step += 1;
  double t = static_cast<double>(model.adam_step);
  double bc1 = 1.0 - std::pow(kBeta1, t);
  double bc2 = 1.0 - std::pow(kBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = *params[i];
    Matrix& m = model.adam_m[i];
    Matrix& v = model.adam_v[i];
    const Matrix& dg = grads.tensors[i];
    for (std::size_t k = 0; k < theta.data.size(); ++k) {
      double g = dg.data[k] + cfg.weight_decay * theta.data[k];
      m.data[k] = kBeta1 * m.data[k] + (1.0 - kBeta1) * g;
      v.data[k] = kBeta2 * v.data[k] + (1.0 - kBeta2) * g * g;
      double mh = m.data[k] / bc1;
      double vh = v.data[k] / bc2;
      theta.data[k] -= cfg.learning_rate * mh / (std::sqrt(vh) + kEps);
    }
  }
}

void gd_step(GcnModel& model, const Gradients& grads, double lr) {
  auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = *params[i];
    for (std::size_t k = 0; k < theta.data.size(); ++k) {
      theta.data[k] -= lr * grads.tensors[i].data[k];
    }
  }
}

namespace {

TrainResult run_epochs(GcnModel& model, const HeteroGraph& g, const std::vector<Example>& batch,
                       const TrainConfig& cfg, int epochs) {
  RelAdjacency adj = build_rel_adjacency(g);
  Matrix features = model_features(g);
  TrainResult res;
  Gradients grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    res.final_loss = loss_and_gradients(model, g, adj, features, batch, &grads);
    if (!std::isfinite(res.final_loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
    }
    adam_step(model, grads, cfg);
    res.epochs_run = epoch + 1;
  }
  return res;
}

}  // namespace

TrainResult train_pre(GcnModel& model, const HeteroGraph& g, const TrainConfig& cfg) {
  std::vector<Example> batch;
  for (NodeIndex v : g.train_target_nodes()) batch.push_back({v, g.label(v)});
  if (batch.empty()) throw ValidationError("train_pre: train split is empty");
  return run_epochs(model, g, batch, cfg, cfg.epochs);
}

TrainResult fine_tune(GcnModel& model, const HeteroGraph& g, const std::vector<Example>& pseudo,
                      const TrainConfig& cfg) {
  if (pseudo.empty()) {
    std::cerr << "warning: no confident pseudo-labeled nodes; skipping fine-tuning\n";
    return TrainResult{};
  }
  return run_epochs(model, g, pseudo, cfg, cfg.fine_tune_epochs);
}

double gradient_check(const GcnModel& model, const HeteroGraph& g, int probe_count,
                      std::uint64_t seed, double step) {
  RelAdjacency adj = build_rel_adjacency(g);
  Matrix features = model_features(g);
  std::vector<Example> batch;
  for (NodeIndex v : g.train_target_nodes()) batch.push_back({v, g.label(v)});
  if (batch.empty()) {
    for (NodeIndex v : g.target_node_indices()) {
      if (g.label(v) != kNoLabel) batch.push_back({v, g.label(v)});
    }
  }
  if (batch.empty()) throw ValidationError("gradient_check: no labeled nodes");

  Gradients grads;
  loss_and_gradients(model, g, adj, features, batch, &grads);

  auto shapes = model.params();
  std::size_t total = 0;
  for (const Matrix* p : shapes) total += p->data.size();

  RandomStream rng(derive_seed(seed, 0x9cadC));
  double max_rel = 0.0;
  GcnModel probe_model = model;
  auto probe_params = probe_model.params();
  for (int probe = 0; probe < probe_count; ++probe) {
    std::size_t flat = static_cast<std::size_t>(rng.uniform_below(total));
    std::size_t tensor = 0;
    while (flat >= probe_params[tensor]->data.size()) {
      flat -= probe_params[tensor]->data.size();
      ++tensor;
    }
    double original = probe_params[tensor]->data[flat];
    probe_params[tensor]->data[flat] = original + step;
    double lp = batch_loss(probe_model, g, adj, features, batch);
    probe_params[tensor]->data[flat] = original - step;
    double lm = batch_loss(probe_model, g, adj, features, batch);
    probe_params[tensor]->data[flat] = original;
    double numeric = (lp - lm) / (2.0 * step);
    double analytic = grads.tensors[tensor].data[flat];
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    double rel = std::abs(analytic - numeric) / denom;
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

std::vector<int> predict(const Matrix& logits, const std::vector<NodeIndex>& nodes) {
  std::vector<int> out(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double* row = logits.row(nodes[i]);
    int best = 0;
    for (std::size_t c = 1; c < logits.cols; ++c) {
      if (row[c] > row[best]) best = static_cast<int>(c);
    }
    out[i] = best;
  }
  return out;
}

GcnConfig config_for_graph(const HeteroGraph& g, const Matrix& features, std::size_t hidden,
                           std::uint64_t seed) {
  GcnConfig cfg;
  cfg.feature_dim = features.cols;
  cfg.hidden = hidden;
  cfg.classes = static_cast<std::size_t>(g.class_count());
  cfg.node_types = g.node_type_count();
  cfg.edge_types = g.edge_type_count();
  cfg.seed = seed;
  return cfg;
}

namespace {

constexpr char kMagic[8] = {'C', 'T', 'H', 'G', 'M', 'D', 'L', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_tensor(std::ofstream& out, const std::string& name, const Matrix& m) {
  write_u64(out, name.size());
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(out, m.rows);
  write_u64(out, m.cols);
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(m.data.data()),
            static_cast<std::streamsize>(m.data.size() * sizeof(double)));
}

Matrix read_tensor(std::ifstream& in, std::string& name) {
  std::uint64_t len = read_u64(in);
  name.resize(len);
  in.read(name.data(), static_cast<std::streamsize>(len));
  std::uint64_t rows = read_u64(in);
  std::uint64_t cols = read_u64(in);
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data.data()),
          static_cast<std::streamsize>(m.data.size() * sizeof(double)));
  return m;
}

}  // namespace

void GcnModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, cfg_.feature_dim);
  write_u64(out, cfg_.hidden);
  write_u64(out, cfg_.classes);
  write_u64(out, cfg_.node_types);
  write_u64(out, cfg_.edge_types);
  write_u64(out, static_cast<std::uint64_t>(cfg_.activation));
  write_u64(out, cfg_.seed);
  write_u64(out, static_cast<std::uint64_t>(adam_step));
  auto names = param_names();
  auto tensors = params();
  write_u64(out, names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    write_tensor(out, names[i], *tensors[i]);
    write_tensor(out, "m." + names[i], adam_m[i]);
    write_tensor(out, "v." + names[i], adam_v[i]);
  }
  if (!out) throw ConfigError("checkpoint write failed: " + path);
}

GcnModel GcnModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("not a model checkpoint: " + path);
  }
  GcnConfig cfg;
  cfg.feature_dim = read_u64(in);
  cfg.hidden = read_u64(in);
  cfg.classes = read_u64(in);
  cfg.node_types = read_u64(in);
  cfg.edge_types = read_u64(in);
  cfg.activation = static_cast<Activation>(read_u64(in));
  cfg.seed = read_u64(in);
  std::uint64_t step = read_u64(in);
  GcnModel model(cfg);
  model.adam_step = static_cast<std::int64_t>(step);
  std::uint64_t count = read_u64(in);
  auto tensors = model.params();
  auto names = model.param_names();
  if (count != names.size()) throw ParseError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    Matrix value = read_tensor(in, name);
    if (name != names[i] || !value.same_shape(*tensors[i])) {
      throw ParseError("checkpoint tensor '" + name + "' does not match model layout");
    }
    *tensors[i] = std::move(value);
    Matrix m = read_tensor(in, name);
    Matrix v = read_tensor(in, name);
    model.adam_m[i] = std::move(m);
    model.adam_v[i] = std::move(v);
  }
  if (!in) throw ParseError("checkpoint truncated: " + path);
  return model;
}

}  // namespace gnn
}  // namespace cthge
