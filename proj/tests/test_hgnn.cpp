#include "cthge/hgnn.hpp"

#include <cmath>

#include "cthge/error.hpp"
#include "cthge/rng.hpp"
#include "cthge/synth.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cthge;

namespace {

// Naive dense re-implementation of the layer rule, used as the oracle.
// Everything is written with plain loops on purpose.
Matrix dense_rel_adjacency(const HeteroGraph& g, TypeId type) {
  std::size_t n = g.node_count();
  std::vector<double> degree(n, 0.0);
  for (const Edge& e : g.edges()) {
    if (e.type != type) continue;
    degree[e.u] += e.weight;
    if (e.v != e.u) degree[e.v] += e.weight;
  }
  Matrix a(n, n);
  for (const Edge& e : g.edges()) {
    if (e.type != type) continue;
    double norm = (degree[e.u] > 0.0 && degree[e.v] > 0.0)
                      ? e.weight / std::sqrt(degree[e.u] * degree[e.v])
                      : 0.0;
    a.at(e.u, e.v) += norm;
    if (e.v != e.u) a.at(e.v, e.u) += norm;
  }
  return a;
}

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

Matrix oracle_forward(const gnn::GcnModel& model, const HeteroGraph& g, const Matrix& features) {
  std::size_t n = g.node_count();
  const auto& cfg = model.config();
  Matrix x0(n, cfg.hidden);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& proj = model.type_proj[g.node_type(static_cast<NodeIndex>(i))];
    for (std::size_t h = 0; h < cfg.hidden; ++h) {
      double acc = 0.0;
      for (std::size_t f = 0; f < cfg.feature_dim; ++f) acc += features.at(i, f) * proj.at(f, h);
      x0.at(i, h) = acc;
    }
  }
  auto layer = [&](const Matrix& x, const Matrix& w_self, const std::vector<Matrix>& w_rel,
                   const Matrix& bias) {
    Matrix z = naive_matmul(x, w_self);
    for (std::size_t r = 0; r < w_rel.size(); ++r) {
      Matrix a = dense_rel_adjacency(g, static_cast<TypeId>(r));
      Matrix agg = naive_matmul(a, x);
      Matrix term = naive_matmul(agg, w_rel[r]);
      for (std::size_t k = 0; k < z.data.size(); ++k) z.data[k] += term.data[k];
    }
    for (std::size_t i = 0; i < z.rows; ++i) {
      for (std::size_t j = 0; j < z.cols; ++j) z.at(i, j) += bias.at(0, j);
    }
    if (cfg.activation == gnn::Activation::kRelu) {
      for (double& v : z.data) v = v > 0.0 ? v : 0.0;
    }
    return z;
  };
  Matrix x1 = layer(x0, model.w1_self, model.w1_rel, model.b1);
  Matrix x2 = layer(x1, model.w2_self, model.w2_rel, model.b2);
  Matrix logits = naive_matmul(x2, model.w_head);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    for (std::size_t j = 0; j < logits.cols; ++j) logits.at(i, j) += model.b_head.at(0, j);
  }
  return logits;
}

gnn::GcnModel make_model(const HeteroGraph& g, const Matrix& features, std::size_t hidden,
                         std::uint64_t seed, gnn::Activation act = gnn::Activation::kRelu) {
  gnn::GcnConfig cfg = gnn::config_for_graph(g, features, hidden, seed);
  cfg.activation = act;
  return gnn::GcnModel(cfg);
}

}  // namespace

TEST_CASE("zero-weight model emits all-zero logits") {
  HeteroGraph g = testutil::random_fixture(2, 8, 8, 2, 30);
  Matrix features = gnn::synthesize_features(g);
  gnn::GcnModel model = make_model(g, features, 8, 1);
  for (Matrix* p : model.params()) p->fill(0.0);
  Matrix logits = gnn::forward(model, g);
  for (double v : logits.data) CHECK(v == 0.0);
}

TEST_CASE("isolated node with identity weights reproduces its projected features") {
  HeteroGraph::Parts parts;
  parts.node_type_names = {"t"};
  parts.edge_type_names = {"e"};
  parts.target_type_name = "t";
  parts.node_ids = {0};
  parts.node_types = {0};
  parts.labels = {kNoLabel};
  parts.splits = {SplitTag::kNone};
  Matrix feats(1, 3);
  feats.at(0, 0) = 0.7;
  feats.at(0, 1) = -0.2;
  feats.at(0, 2) = 1.5;
  parts.features = feats;
  HeteroGraph g = HeteroGraph::from_parts(std::move(parts));

  gnn::GcnConfig cfg;
  cfg.feature_dim = 3;
  cfg.hidden = 3;
  cfg.classes = 3;
  cfg.node_types = 1;
  cfg.edge_types = 1;
  cfg.activation = gnn::Activation::kIdentity;
  gnn::GcnModel model(cfg);
  for (Matrix* p : model.params()) p->fill(0.0);
  for (int i = 0; i < 3; ++i) {
    model.type_proj[0].at(i, i) = 1.0;
    model.w1_self.at(i, i) = 1.0;
    model.w2_self.at(i, i) = 1.0;
    model.w_head.at(i, i) = 1.0;
  }
  Matrix logits = gnn::forward(model, g);
  CHECK(logits.at(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(logits.at(0, 1) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(logits.at(0, 2) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("forward matches the dense oracle within 1e-10") {
  HeteroGraph g = testutil::random_fixture(5, 12, 18, 3, 90);
  Matrix features = gnn::synthesize_features(g);
  gnn::GcnModel model = make_model(g, features, 16, 3);
  Matrix fast = gnn::forward(model, g);
  Matrix slow = oracle_forward(model, g, features);
  REQUIRE(fast.rows == slow.rows);
  for (std::size_t i = 0; i < fast.data.size(); ++i) {
    CHECK(std::abs(fast.data[i] - slow.data[i]) < 1e-10);
  }
}

TEST_CASE("gradient check: linear model") {
  HeteroGraph g = testutil::random_fixture(6, 10, 10, 2, 50);
  Matrix features = gnn::synthesize_features(g);
  gnn::GcnModel model = make_model(g, features, 8, 4, gnn::Activation::kIdentity);
  double err = gnn::gradient_check(model, g, 40, 11);
  CHECK(err < 1e-7);
}

TEST_CASE("gradient check: full two-layer relu model") {
  HeteroGraph g = testutil::random_fixture(8, 20, 25, 3, 140);
  Matrix features = gnn::synthesize_features(g);
  gnn::GcnModel model = make_model(g, features, 12, 5);
  double err = gnn::gradient_check(model, g, 64, 12);
  CHECK(err < 1e-4);
}

TEST_CASE("gradient of a dead class bias is zero both ways") {
  HeteroGraph g = testutil::random_fixture(9, 10, 10, 2, 40);
  Matrix features = gnn::synthesize_features(g);
  gnn::GcnModel model = make_model(g, features, 8, 6);
  // Drive one class's head bias so far down that its softmax mass
  // underflows to exactly zero.
  model.b_head.at(0, 1) = -1000.0;

  gnn::RelAdjacency adj = gnn::build_rel_adjacency(g);
  std::vector<gnn::Example> batch;
  for (NodeIndex v : g.train_target_nodes()) {
    if (g.label(v) == 0) batch.push_back({v, 0});  // class 1 never appears
  }
  REQUIRE(!batch.empty());
  gnn::Gradients grads;
  gnn::loss_and_gradients(model, g, adj, features, batch, &grads);
  double analytic = grads.tensors.back().at(0, 1);  // b_head is last
  CHECK(analytic == 0.0);

  double h = 1e-5;
  gnn::GcnModel probe = model;
  probe.b_head.at(0, 1) = -1000.0 + h;
  double lp = gnn::batch_loss(probe, g, adj, features, batch);
  probe.b_head.at(0, 1) = -1000.0 - h;
  double lm = gnn::batch_loss(probe, g, adj, features, batch);
  CHECK((lp - lm) == 0.0);
}

TEST_CASE("train_pre fits a separable synthetic graph") {
  synth::SynthConfig cfg;
  cfg.n_t = 60;
  cfg.n_n = 40;
  cfg.classes = 2;
  cfg.target_chr = 0.95;
  cfg.tt_edges = 40;
  cfg.tn_edges = 240;
  cfg.nn_edges = 20;
  cfg.feature_dim = 6;
  cfg.class_separation = 3.0;
  cfg.seed = 21;
  synth::SynthGraph sg = synth::generate(cfg);

  gnn::TrainConfig tc;
  tc.epochs = 400;
  tc.hidden = 16;
  tc.learning_rate = 5e-4;
  tc.weight_decay = 1e-4;
  tc.seed = 2;
  gnn::GcnModel model(
      gnn::config_for_graph(sg.graph, *sg.graph.features(), tc.hidden, tc.seed));
  gnn::TrainResult res = gnn::train_pre(model, sg.graph, tc);
  CHECK(res.epochs_run == 400);
  CHECK(std::isfinite(res.final_loss));

  Matrix logits = gnn::forward(model, sg.graph);
  auto train_nodes = sg.graph.train_target_nodes();
  std::vector<int> pred = gnn::predict(logits, train_nodes);
  int correct = 0;
  for (std::size_t i = 0; i < train_nodes.size(); ++i) {
    if (pred[i] == sg.graph.label(train_nodes[i])) ++correct;
  }
  double acc = static_cast<double>(correct) / static_cast<double>(train_nodes.size());
  CHECK(acc >= 0.95);
}

TEST_CASE("zero epochs leave the model unchanged") {
  HeteroGraph g = testutil::random_fixture(10, 10, 10, 2, 40);
  HeteroGraph graph = g.with_features(gnn::synthesize_features(g));
  gnn::TrainConfig tc;
  tc.epochs = 0;
  tc.hidden = 8;
  tc.seed = 3;
  gnn::GcnModel model(gnn::config_for_graph(graph, *graph.features(), tc.hidden, tc.seed));
  gnn::GcnModel before = model;
  gnn::train_pre(model, graph, tc);
  auto pa = before.params();
  auto pb = model.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("same seed trains to bit-identical parameters") {
  HeteroGraph g = testutil::random_fixture(12, 15, 15, 3, 80);
  HeteroGraph graph = g.with_features(gnn::synthesize_features(g));
  gnn::TrainConfig tc;
  tc.epochs = 30;
  tc.hidden = 8;
  tc.seed = 44;
  gnn::GcnModel a(gnn::config_for_graph(graph, *graph.features(), tc.hidden, tc.seed));
  gnn::GcnModel b(gnn::config_for_graph(graph, *graph.features(), tc.hidden, tc.seed));
  gnn::train_pre(a, graph, tc);
  gnn::train_pre(b, graph, tc);
  auto pa = a.params();
  auto pb = b.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("fine_tune") {
  HeteroGraph g = testutil::random_fixture(13, 15, 15, 3, 80);
  HeteroGraph graph = g.with_features(gnn::synthesize_features(g));
  gnn::TrainConfig tc;
  tc.epochs = 50;
  tc.fine_tune_epochs = 20;
  tc.hidden = 8;
  tc.seed = 5;
  gnn::GcnModel model(gnn::config_for_graph(graph, *graph.features(), tc.hidden, tc.seed));
  gnn::train_pre(model, graph, tc);

  SUBCASE("empty pseudo set skips and leaves parameters unchanged") {
    gnn::GcnModel before = model;
    gnn::TrainResult res = gnn::fine_tune(model, graph, {}, tc);
    CHECK(res.epochs_run == 0);
    auto pa = before.params();
    auto pb = model.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
  }

  SUBCASE("agreeing pseudo labels start below the uniform-prediction loss") {
    // Pseudo-label non-target nodes with the model's own predictions;
    // the cross-entropy at epoch 0 must then beat ln C.
    Matrix logits = gnn::forward(model, graph);
    std::vector<gnn::Example> pseudo;
    for (NodeIndex v = 0; v < graph.node_count(); ++v) {
      if (!graph.is_target(v)) {
        std::vector<NodeIndex> one{v};
        pseudo.push_back({v, gnn::predict(logits, one)[0]});
      }
    }
    gnn::RelAdjacency adj = gnn::build_rel_adjacency(graph);
    double loss0 = gnn::batch_loss(model, graph, adj, *graph.features(), pseudo);
    CHECK(loss0 < std::log(static_cast<double>(graph.class_count())));
  }

  SUBCASE("same-seed fine-tuning is repeatable") {
    std::vector<gnn::Example> pseudo = {{static_cast<NodeIndex>(20), 0},
                                        {static_cast<NodeIndex>(21), 1}};
    gnn::GcnModel a = model;
    gnn::GcnModel b = model;
    gnn::fine_tune(a, graph, pseudo, tc);
    gnn::fine_tune(b, graph, pseudo, tc);
    auto pa = a.params();
    auto pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
  }
}

TEST_CASE("softmax rows sum to one") {
  RandomStream rng(77);
  Matrix logits(50, 5);
  for (double& v : logits.data) v = rng.uniform(-30.0, 30.0);
  Matrix soft = softmax_rows(logits);
  for (std::size_t i = 0; i < soft.rows; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < soft.cols; ++j) sum += soft.at(i, j);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("loss is non-increasing under small-step gradient descent") {
  HeteroGraph g = testutil::random_fixture(14, 12, 12, 2, 60);
  HeteroGraph graph = g.with_features(gnn::synthesize_features(g));
  gnn::GcnModel model = make_model(graph, *graph.features(), 8, 7);
  gnn::RelAdjacency adj = gnn::build_rel_adjacency(graph);
  std::vector<gnn::Example> batch;
  for (NodeIndex v : graph.train_target_nodes()) batch.push_back({v, graph.label(v)});

  gnn::Gradients grads;
  double prev = gnn::loss_and_gradients(model, graph, adj, *graph.features(), batch, &grads);
  for (int step = 0; step < 5; ++step) {
    gnn::gd_step(model, grads, 1e-6);
    double next = gnn::loss_and_gradients(model, graph, adj, *graph.features(), batch, &grads);
    CHECK(next <= prev + 1e-12);
    prev = next;
  }
}

TEST_CASE("checkpoint round trip restores parameters and optimizer state") {
  testutil::TempDir dir("ckpt");
  HeteroGraph g = testutil::random_fixture(15, 10, 10, 2, 40);
  HeteroGraph graph = g.with_features(gnn::synthesize_features(g));
  gnn::TrainConfig tc;
  tc.epochs = 10;
  tc.hidden = 8;
  tc.seed = 8;
  gnn::GcnModel model(gnn::config_for_graph(graph, *graph.features(), tc.hidden, tc.seed));
  gnn::train_pre(model, graph, tc);
  model.save(dir.file("model.bin"));
  gnn::GcnModel loaded = gnn::GcnModel::load(dir.file("model.bin"));
  auto pa = model.params();
  auto pb = loaded.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
  CHECK(loaded.adam_step == model.adam_step);
  for (std::size_t i = 0; i < model.adam_m.size(); ++i) {
    CHECK(loaded.adam_m[i].data == model.adam_m[i].data);
    CHECK(loaded.adam_v[i].data == model.adam_v[i].data);
  }
  // Continuing training from the checkpoint matches the original.
  gnn::train_pre(model, graph, tc);
  gnn::train_pre(loaded, graph, tc);
  auto qa = model.params();
  auto qb = loaded.params();
  for (std::size_t i = 0; i < qa.size(); ++i) CHECK(qa[i]->data == qb[i]->data);
}
