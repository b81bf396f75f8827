#include "cthge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "cthge/error.hpp"
#include "cthge/rng.hpp"

namespace cthge {
namespace eval {

namespace {

std::size_t take_count(std::size_t total, double ratio) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(total) * ratio));
}

void assign_slices(const std::vector<NodeIndex>& nodes, double train_r, double val_r,
                   std::vector<SplitTag>& tags) {
  std::size_t n_train = take_count(nodes.size(), train_r);
  std::size_t n_val = take_count(nodes.size(), val_r);
  n_train = std::min(n_train, nodes.size());
  n_val = std::min(n_val, nodes.size() - n_train);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    SplitTag tag = i < n_train            ? SplitTag::kTrain
                   : i < n_train + n_val  ? SplitTag::kVal
                                          : SplitTag::kTest;
    tags[nodes[i]] = tag;
  }
}

}  // namespace

SplitAssignment make_split(const HeteroGraph& g, double train_ratio, double val_ratio,
                           double test_ratio, std::uint64_t seed) {
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  SplitAssignment out;
  out.tags.assign(g.node_count(), SplitTag::kNone);

  std::vector<std::vector<NodeIndex>> by_class(static_cast<std::size_t>(g.class_count()));
  std::vector<NodeIndex> all;
  for (NodeIndex v : g.target_node_indices()) {
    int y = g.label(v);
    if (y == kNoLabel) continue;
    by_class[static_cast<std::size_t>(y)].push_back(v);
    all.push_back(v);
  }
  if (all.empty()) throw ValidationError("make_split: no labeled target nodes");

  bool can_stratify = true;
  for (const auto& members : by_class) {
    if (!members.empty() && members.size() < 3) can_stratify = false;
  }

  RandomStream rng(derive_seed(seed, 0x51u));
  if (can_stratify) {
    for (auto& members : by_class) {
      if (members.empty()) continue;
      rng.shuffle(members);
      assign_slices(members, train_ratio, val_ratio, out.tags);
    }
  } else {
    std::cerr << "warning: a class has fewer than 3 labeled nodes; "
                 "falling back to an unstratified split\n";
    out.stratified = false;
    rng.shuffle(all);
    assign_slices(all, train_ratio, val_ratio, out.tags);
  }
  return out;
}

EvalReport f1_scores(const std::vector<int>& pred, const std::vector<int>& truth,
                     int class_count) {
  if (pred.empty() || pred.size() != truth.size()) {
    throw ValidationError("f1_scores: prediction and truth must be non-empty and aligned");
  }
  int classes = class_count;
  if (classes <= 0) {
    for (int v : pred) classes = std::max(classes, v + 1);
    for (int v : truth) classes = std::max(classes, v + 1);
  }
  EvalReport rep;
  std::size_t k = static_cast<std::size_t>(classes);
  rep.confusion.assign(k, std::vector<std::int64_t>(k, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= classes || truth[i] < 0 || truth[i] >= classes) {
      throw ValidationError("f1_scores: class id out of range");
    }
    rep.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])]++;
  }

  rep.precision.assign(k, 0.0);
  rep.recall.assign(k, 0.0);
  double macro_sum = 0.0;
  std::int64_t tp_total = 0, fp_total = 0, fn_total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = rep.confusion[c][c];
    std::int64_t fn = 0, fp = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fn += rep.confusion[c][o];
      fp += rep.confusion[o][c];
    }
    tp_total += tp;
    fp_total += fp;
    fn_total += fn;
    rep.precision[c] = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    rep.recall[c] = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
    macro_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  }
  rep.macro_f1 = macro_sum / static_cast<double>(k);
  double micro_denom = 2.0 * static_cast<double>(tp_total) + static_cast<double>(fp_total + fn_total);
  rep.micro_f1 = micro_denom > 0.0 ? 2.0 * static_cast<double>(tp_total) / micro_denom : 0.0;
  return rep;
}

SeedStats aggregate(const std::vector<EvalReport>& reports) {
  SeedStats s;
  if (reports.empty()) return s;
  double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    s.macro_mean += r.macro_f1;
    s.micro_mean += r.micro_f1;
  }
  s.macro_mean /= n;
  s.micro_mean /= n;
  if (reports.size() > 1) {
    double vmac = 0.0, vmic = 0.0;
    for (const auto& r : reports) {
      vmac += (r.macro_f1 - s.macro_mean) * (r.macro_f1 - s.macro_mean);
      vmic += (r.micro_f1 - s.micro_mean) * (r.micro_f1 - s.micro_mean);
    }
    s.macro_std = std::sqrt(vmac / (n - 1.0));
    s.micro_std = std::sqrt(vmic / (n - 1.0));
  }
  return s;
}

double ari(const std::vector<double>& before, const std::vector<double>& after) {
  if (before.empty() || before.size() != after.size()) {
    throw ValidationError("ari: before/after must be non-empty paired lists");
  }
  std::vector<double> gains(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (!(before[i] > 0.0)) {
      throw DomainError("ari: before value must be positive");
    }
    gains[i] = (after[i] - before[i]) / before[i];
  }
  return pairwise_sum(gains) / static_cast<double>(gains.size());
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  double n = static_cast<double>(x.size());
  double mx = pairwise_sum(rx) / n;
  double my = pairwise_sum(ry) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace eval
}  // namespace cthge
