#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cthge/hetgraph.hpp"

namespace cthge {
namespace eval {

struct EvalReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::vector<double> precision;  // per class
  std::vector<double> recall;
  std::vector<std::vector<std::int64_t>> confusion;  // [truth][pred]
};

struct SeedStats {
  double macro_mean = 0.0;
  double macro_std = 0.0;
  double micro_mean = 0.0;
  double micro_std = 0.0;
};

struct SplitAssignment {
  std::vector<SplitTag> tags;  // per node index; non-targets stay kNone
  bool stratified = true;
};

// Stratified train/val/test split over labeled target nodes. Classes
// with fewer than 3 members force a plain shuffled split.
SplitAssignment make_split(const HeteroGraph& g, double train_ratio, double val_ratio,
                           double test_ratio, std::uint64_t seed);

// pred/truth are parallel class vectors. class_count <= 0 infers
// max class + 1.
EvalReport f1_scores(const std::vector<int>& pred, const std::vector<int>& truth,
                     int class_count = 0);

SeedStats aggregate(const std::vector<EvalReport>& reports);

// Average relative improvement: mean over paired entries of
// (after - before) / before.
double ari(const std::vector<double>& before, const std::vector<double>& after);

// Spearman rank correlation with average ranks for ties; nullopt when
// either argument has zero rank variance.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eval
}  // namespace cthge
