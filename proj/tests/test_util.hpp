#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "cthge/hetgraph.hpp"
#include "cthge/rng.hpp"
#include "cthge/text.hpp"

namespace testutil {

// Scratch directory that cleans up after itself.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("cthge_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Random typed fixture: two node types, random cross/tt/nn edges,
// labels and splits on target nodes.
inline cthge::HeteroGraph random_fixture(std::uint64_t seed, std::size_t n_t = 20,
                                         std::size_t n_n = 30, int classes = 3,
                                         std::size_t edges = 80) {
  using namespace cthge;
  RandomStream rng(seed);
  HeteroGraph::Parts parts;
  parts.node_type_names = {"t", "n"};
  parts.edge_type_names = {"a", "b"};
  parts.target_type_name = "t";
  for (std::size_t i = 0; i < n_t + n_n; ++i) {
    parts.node_ids.push_back(static_cast<NodeId>(i));
    bool target = i < n_t;
    parts.node_types.push_back(target ? 0 : 1);
    parts.labels.push_back(target ? static_cast<int>(rng.uniform_below(classes)) : kNoLabel);
    parts.splits.push_back(target
                               ? (rng.bernoulli(0.5) ? SplitTag::kTrain
                                                     : (rng.bernoulli(0.5) ? SplitTag::kVal
                                                                           : SplitTag::kTest))
                               : SplitTag::kNone);
  }
  // Guarantee >= 2 classes and a non-empty train split.
  parts.labels[0] = 0;
  parts.labels[1] = 1;
  parts.splits[0] = SplitTag::kTrain;
  parts.splits[1] = SplitTag::kTrain;
  std::size_t n = n_t + n_n;
  for (std::size_t e = 0; e < edges; ++e) {
    auto u = static_cast<NodeIndex>(rng.uniform_below(n));
    auto v = static_cast<NodeIndex>(rng.uniform_below(n));
    parts.edges.push_back({u, v, static_cast<TypeId>(rng.uniform_below(2)),
                           rng.uniform(0.0, 2.0)});
  }
  return HeteroGraph::from_parts(std::move(parts));
}

// Random probability row written into an existing matrix row.
inline void random_prob_row(cthge::RandomStream& rng, double* row, std::size_t c) {
  double sum = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    row[j] = -std::log(1.0 - rng.uniform01());
    sum += row[j];
  }
  for (std::size_t j = 0; j < c; ++j) row[j] /= sum;
}

}  // namespace testutil
