#include "cthge/chr.hpp"

#include <cmath>

#include "cthge/error.hpp"
#include "cthge/rng.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cthge;

namespace {

// Two target (train/test) nodes and two non-target nodes in a line.
HeteroGraph tiny_graph(int classes = 2) {
  HeteroGraph::Parts parts;
  parts.node_type_names = {"t", "n"};
  parts.edge_type_names = {"e"};
  parts.target_type_name = "t";
  parts.node_ids = {0, 1, 2, 3};
  parts.node_types = {0, 0, 1, 1};
  parts.labels = {1, 0, kNoLabel, kNoLabel};
  parts.splits = {SplitTag::kTrain, SplitTag::kTest, SplitTag::kNone, SplitTag::kNone};
  parts.edges.push_back({0, 2, 0, 1.0});
  parts.edges.push_back({1, 3, 0, 1.0});
  (void)classes;
  return HeteroGraph::from_parts(std::move(parts));
}

}  // namespace

TEST_CASE("init_target_info builds one-hot and softmax rows") {
  HeteroGraph::Parts parts;
  parts.node_type_names = {"t"};
  parts.edge_type_names = {"e"};
  parts.target_type_name = "t";
  parts.node_ids = {0, 1};
  parts.node_types = {0, 0};
  parts.labels = {2, 3};
  parts.splits = {SplitTag::kTrain, SplitTag::kTest};
  HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
  REQUIRE(g.class_count() == 4);

  SUBCASE("train row is exactly one-hot") {
    Matrix logits(1, 4);
    Matrix l = chr::init_target_info(g, &logits);
    CHECK(l.at(0, 2) == 1.0);
    CHECK(l.at(0, 0) == 0.0);
    CHECK(l.at(0, 1) == 0.0);
    CHECK(l.at(0, 3) == 0.0);
  }

  SUBCASE("equal logits give the uniform softmax") {
    Matrix logits(1, 4);
    Matrix l = chr::init_target_info(g, &logits);
    for (int c = 0; c < 4; ++c) CHECK(l.at(1, c) == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("uniform fallback without logits") {
    Matrix l = chr::init_target_info(g, nullptr);
    for (int c = 0; c < 4; ++c) CHECK(l.at(1, c) == doctest::Approx(0.25).epsilon(1e-12));
  }

  SUBCASE("row count mismatch and non-finite logits are rejected") {
    Matrix bad(2, 4);
    CHECK_THROWS_AS(chr::init_target_info(g, &bad), DimensionError);
    Matrix inf_logits(1, 4);
    inf_logits.at(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(chr::init_target_info(g, &inf_logits), NumericError);
  }
}

TEST_CASE("softmax of [1,0] matches the scalar oracle") {
  // Independent scalar computation: e / (e + 1) and 1 / (e + 1).
  double e = std::exp(1.0);
  double expect0 = e / (e + 1.0);
  double expect1 = 1.0 / (e + 1.0);

  HeteroGraph::Parts parts;
  parts.node_type_names = {"t"};
  parts.edge_type_names = {"e"};
  parts.target_type_name = "t";
  parts.node_ids = {0, 1};
  parts.node_types = {0, 0};
  parts.labels = {0, 1};
  parts.splits = {SplitTag::kTrain, SplitTag::kTest};
  HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
  Matrix logits(1, 2);
  logits.at(0, 0) = 1.0;
  Matrix l = chr::init_target_info(g, &logits);
  CHECK(l.at(1, 0) == doctest::Approx(expect0).epsilon(1e-12));
  CHECK(l.at(1, 1) == doctest::Approx(expect1).epsilon(1e-12));
  CHECK(l.at(1, 0) == doctest::Approx(0.7311).epsilon(1e-4));
}

TEST_CASE("propagate matches hand sums and a dense oracle") {
  SUBCASE("hand case") {
    // a_nt row [1,1,0] over L rows [1,0],[0,1],[1,0] -> P row [1,1].
    HeteroGraph::Parts parts;
    parts.node_type_names = {"t", "n"};
    parts.edge_type_names = {"e"};
    parts.target_type_name = "t";
    parts.node_ids = {0, 1, 2, 3};
    parts.node_types = {0, 0, 0, 1};
    parts.labels = {0, 1, 0, kNoLabel};
    parts.splits = {SplitTag::kTrain, SplitTag::kTrain, SplitTag::kTrain, SplitTag::kNone};
    parts.edges.push_back({0, 3, 0, 1.0});
    parts.edges.push_back({1, 3, 0, 1.0});
    HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
    CrossTypeView view = cross_view(g);
    Matrix l = chr::init_target_info(g, nullptr);
    Matrix p = chr::propagate(view, l);
    REQUIRE(p.rows == 1);
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(0, 1) == 1.0);
  }

  SUBCASE("all-zero weights give an all-zero P") {
    HeteroGraph g = testutil::random_fixture(3, 10, 15, 3, 60);
    HeteroGraph::Parts parts = g.to_parts();
    for (Edge& e : parts.edges) e.weight = 0.0;
    HeteroGraph zeroed = HeteroGraph::from_parts(std::move(parts));
    CrossTypeView view = cross_view(zeroed);
    Matrix l = chr::init_target_info(zeroed, nullptr);
    Matrix p = chr::propagate(view, l);
    for (double v : p.data) CHECK(v == 0.0);
  }

  SUBCASE("random sparse instance matches the dense product oracle") {
    HeteroGraph g = testutil::random_fixture(17, 50, 200, 4, 800);
    CrossTypeView view = cross_view(g);
    Matrix l = chr::init_target_info(g, nullptr);
    Matrix p = chr::propagate(view, l);
    Matrix dense = view.a_nt.to_dense();
    Matrix oracle;
    matmul(dense, l, oracle);
    REQUIRE(p.rows == oracle.rows);
    for (std::size_t i = 0; i < p.rows; ++i) {
      for (std::size_t j = 0; j < p.cols; ++j) {
        CHECK(p.at(i, j) == doctest::Approx(oracle.at(i, j)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("normalize_rows") {
  Matrix p(3, 2);
  p.at(0, 0) = 1.0;
  p.at(0, 1) = 1.0;
  p.at(2, 0) = 3.0;
  p.at(2, 1) = 1.0;
  chr::NormalizedRows out = chr::normalize_rows(p);
  CHECK(out.p_prime.at(0, 0) == 0.5);
  CHECK(out.p_prime.at(0, 1) == 0.5);
  CHECK(out.p_prime.at(1, 0) == 0.0);
  CHECK(out.isolated[1]);
  CHECK(!out.isolated[0]);
  CHECK(out.p_prime.at(2, 0) == 0.75);
  CHECK(out.p_prime.at(2, 1) == 0.25);

  Matrix neg(1, 2);
  neg.at(0, 0) = -0.5;
  CHECK_THROWS_AS(chr::normalize_rows(neg), NumericError);
}

TEST_CASE("build_target_info shapes and permutation invariance") {
  SUBCASE("target rows first, then non-target rows") {
    HeteroGraph g = tiny_graph();
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    CHECK(info.h.rows == 4);
    CHECK(info.n_t == 2);
    CHECK(info.n_n == 2);
  }

  SUBCASE("graph without non-target nodes gives H = L") {
    HeteroGraph::Parts parts;
    parts.node_type_names = {"t"};
    parts.edge_type_names = {"e"};
    parts.target_type_name = "t";
    parts.node_ids = {0, 1};
    parts.node_types = {0, 0};
    parts.labels = {0, 1};
    parts.splits = {SplitTag::kTrain, SplitTag::kTrain};
    HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    CHECK(info.h.rows == 2);
    CHECK(info.h.at(0, 0) == 1.0);
    CHECK(info.h.at(1, 1) == 1.0);
  }

  SUBCASE("shuffled node ids produce the same H after canonicalization") {
    HeteroGraph g = testutil::random_fixture(23, 12, 18, 3, 70);
    HeteroGraph::Parts parts = g.to_parts();
    // Relabel ids by reversing, preserving relative order semantics.
    std::vector<NodeId> new_ids(parts.node_ids.size());
    for (std::size_t i = 0; i < parts.node_ids.size(); ++i) {
      new_ids[i] = 1000 - parts.node_ids[i];
    }
    parts.node_ids = new_ids;
    HeteroGraph shuffled = HeteroGraph::from_parts(std::move(parts));

    chr::TargetInfoMatrix a = chr::target_info(g, nullptr);
    chr::TargetInfoMatrix b = chr::target_info(shuffled, nullptr);
    REQUIRE(a.h.rows == b.h.rows);
    // Node with original id x is now id 1000 - x; compare per node.
    for (NodeIndex v = 0; v < g.node_count(); ++v) {
      NodeId original_id = g.node_id(v);
      for (NodeIndex w = 0; w < shuffled.node_count(); ++w) {
        if (shuffled.node_id(w) == 1000 - original_id) {
          for (std::size_t c = 0; c < a.classes; ++c) {
            CHECK(a.node_row(v)[c] == doctest::Approx(b.node_row(w)[c]).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("edge similarity dot products") {
  HeteroGraph g = tiny_graph();
  chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
  // Train node 0 has one-hot label 1; its neighbor (node 2) inherits
  // that exact row, so the similarity is 1.
  CHECK(chr::edge_similarity(info, 0, 2) == doctest::Approx(1.0).epsilon(1e-12));

  // Hand-set rows.
  chr::TargetInfoMatrix custom = info;
  custom.h.at(custom.row_of_node[0], 0) = 0.6;
  custom.h.at(custom.row_of_node[0], 1) = 0.4;
  custom.h.at(custom.row_of_node[2], 0) = 0.5;
  custom.h.at(custom.row_of_node[2], 1) = 0.5;
  CHECK(chr::edge_similarity(custom, 0, 2) == doctest::Approx(0.5).epsilon(1e-12));

  custom.h.at(custom.row_of_node[0], 0) = 1.0;
  custom.h.at(custom.row_of_node[0], 1) = 0.0;
  custom.h.at(custom.row_of_node[2], 0) = 0.0;
  custom.h.at(custom.row_of_node[2], 1) = 1.0;
  CHECK(chr::edge_similarity(custom, 0, 2) == 0.0);
}

TEST_CASE("compute_chr means, bounds, errors") {
  SUBCASE("two edges with sims {1, 0} give CHR 0.5") {
    HeteroGraph g = tiny_graph();
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    // Node 1's (test) uniform row propagates to node 3: sim(1,3) = 0.5.
    // Force it to 0 by hand to make the mean exactly 0.5.
    info.h.at(info.row_of_node[1], 0) = 1.0;
    info.h.at(info.row_of_node[1], 1) = 0.0;
    info.h.at(info.row_of_node[3], 0) = 0.0;
    info.h.at(info.row_of_node[3], 1) = 1.0;
    CHECK(chr::compute_chr(g, info) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("all-matching one-hot rows give CHR exactly 1") {
    HeteroGraph::Parts parts;
    parts.node_type_names = {"t", "n"};
    parts.edge_type_names = {"e"};
    parts.target_type_name = "t";
    for (int i = 0; i < 6; ++i) {
      parts.node_ids.push_back(i);
      parts.node_types.push_back(i < 3 ? 0 : 1);
      parts.labels.push_back(i < 3 ? i % 2 : kNoLabel);
      parts.splits.push_back(i < 3 ? SplitTag::kTrain : SplitTag::kNone);
    }
    parts.edges.push_back({0, 3, 0, 1.0});
    parts.edges.push_back({1, 4, 0, 1.0});
    parts.edges.push_back({2, 5, 0, 1.0});
    HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    CHECK(chr::compute_chr(g, info) == 1.0);
  }

  SUBCASE("no cross edges -> undefined metric error, never silent zero") {
    HeteroGraph::Parts parts;
    parts.node_type_names = {"t"};
    parts.edge_type_names = {"e"};
    parts.target_type_name = "t";
    parts.node_ids = {0, 1};
    parts.node_types = {0, 0};
    parts.labels = {0, 1};
    parts.splits = {SplitTag::kTrain, SplitTag::kTrain};
    parts.edges.push_back({0, 1, 0, 1.0});
    HeteroGraph g = HeteroGraph::from_parts(std::move(parts));
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    CHECK_THROWS_AS(chr::compute_chr(g, info), UndefinedMetricError);
  }
}

TEST_CASE("compute_chr equals the brute-force scalar oracle on random fixtures") {
  RandomStream rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    HeteroGraph g = testutil::random_fixture(1000 + trial, 30, 70, 4, 300);
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    // Replace rows with random distributions to exercise the general case.
    for (std::size_t r = 0; r < info.h.rows; ++r) {
      testutil::random_prob_row(rng, info.h.row(r), info.classes);
    }
    EdgePartition parts = partition_edges(g);
    if (parts.tn.empty()) continue;
    double slow = 0.0;
    for (EdgeId e : parts.tn) {
      const Edge& edge = g.edge(e);
      double s = 0.0;
      for (std::size_t c = 0; c < info.classes; ++c) {
        s += info.node_row(edge.u)[c] * info.node_row(edge.v)[c];
      }
      slow += s;
    }
    slow /= static_cast<double>(parts.tn.size());
    double fast = chr::compute_chr(g, info);
    CHECK(std::abs(fast - slow) < 1e-12);
    CHECK(fast >= 0.0);
    CHECK(fast <= 1.0);
  }
}

TEST_CASE("homogeneous specialization: CHR reduces to the label homophily ratio") {
  RandomStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    // Single-type labeled graph; every node is a target.
    HeteroGraph::Parts parts;
    parts.node_type_names = {"t"};
    parts.edge_type_names = {"e"};
    parts.target_type_name = "t";
    std::size_t n = 20;
    int classes = 3;
    for (std::size_t i = 0; i < n; ++i) {
      parts.node_ids.push_back(static_cast<NodeId>(i));
      parts.node_types.push_back(0);
      parts.labels.push_back(static_cast<int>(rng.uniform_below(classes)));
      parts.splits.push_back(SplitTag::kTrain);
    }
    parts.labels[0] = 0;
    parts.labels[1] = 1;
    for (int e = 0; e < 60; ++e) {
      auto u = static_cast<NodeIndex>(rng.uniform_below(n));
      auto v = static_cast<NodeIndex>(rng.uniform_below(n));
      parts.edges.push_back({u, v, 0, 1.0});
    }
    HeteroGraph g = HeteroGraph::from_parts(std::move(parts));

    // One-hot H over all nodes (all are train), mean similarity over
    // every edge.
    chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
    std::vector<EdgeId> all_edges;
    for (EdgeId e = 0; e < g.edge_count(); ++e) all_edges.push_back(e);
    double lhs = chr::mean_similarity(g, info, all_edges);
    double rhs = chr::homophily_ratio(g);
    CHECK(lhs == rhs);  // exact: sums of 0/1 in identical order
  }
}

TEST_CASE("CHR is invariant under node relabeling") {
  HeteroGraph g = testutil::random_fixture(31, 15, 25, 3, 150);
  chr::TargetInfoMatrix info = chr::target_info(g, nullptr);
  double before = chr::compute_chr(g, info);

  HeteroGraph::Parts parts = g.to_parts();
  for (NodeId& id : parts.node_ids) id = id * 7 + 3;  // monotone relabel
  HeteroGraph relabeled = HeteroGraph::from_parts(std::move(parts));
  chr::TargetInfoMatrix info2 = chr::target_info(relabeled, nullptr);
  CHECK(chr::compute_chr(relabeled, info2) == doctest::Approx(before).epsilon(1e-15));
}
