#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cthge/matrix.hpp"

namespace cthge {
namespace theory {

// Binary-classification mixture setting behind the generalization
// bound: two Gaussian target classes with isotropic covariance, mixed
// through one aggregation layer with same-type homophily q_s and
// cross-type homophily q_c.
struct MixtureSpec {
  std::vector<double> mu_x0;
  std::vector<double> mu_x1;
  double sigma0 = 1.0;  // per-class isotropic covariance scale
  double sigma1 = 1.0;
  double lambda = 0.5;  // non-target mean mixing coefficient; inert in the bound
  double q_s = 1.0;
  double q_c = 1.0;
  Matrix w;  // aggregation weight matrix, dim x dim
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;

  std::size_t dim() const { return mu_x0.size(); }
  void validate_shapes() const;
  // q_s + q_c > 1; required for the bound's denominator.
  void validate_domain() const;

  // Mean of the non-target mixture: lambda*mu_x0 + (1-lambda)*mu_x1.
  std::vector<double> non_target_mean() const;
};

struct ComplexityReport {
  std::vector<double> intra;      // S_i (or T_i^2 for the squared form)
  std::vector<std::vector<double>> inter;  // M_{i,j}
  double value = 0.0;
};

// Davies-Bouldin index over per-class representation sets:
// S_i = ((1/n_i) sum |O - mu_i|^p)^(1/p), M_ij = ||mu_i - mu_j||_p,
// C = (1/k) sum_i max_{j != i} (S_i + S_j) / M_ij.
ComplexityReport db_index(const std::vector<Matrix>& class_reps, double p = 2.0);

// Squared form: C = (1/k) sum_t max_{s != t} (T_t^2 + T_s^2) / M_ts^2.
ComplexityReport db_index_squared(const std::vector<Matrix>& class_reps);

struct BoundResult {
  double c0 = 0.0;
  double c_lower = 0.0;
};

// C0 = 2 (E[dX0^T W W^T dX0] + E[dX1^T W W^T dX1]) / ||W (mu0 - mu1)||^2,
// evaluated in closed form for the isotropic Gaussians of the spec;
// C_lower = C0 / (2 q_s + 2 q_c - 2)^2.
BoundResult lower_bound(const MixtureSpec& spec);

// Exact d C_lower / d q_c = -4 C0 / (2 q_s + 2 q_c - 2)^3; strictly
// negative on the valid domain.
double lower_bound_derivative(const MixtureSpec& spec);

struct SweepRow {
  double q_c = 0.0;
  double db_index = 0.0;    // empirical squared DB index
  double db_stderr = 0.0;   // batch-means standard error of db_index
  double c_lower = 0.0;
  double c0 = 0.0;
  bool domain_ok = true;    // false when q_s + q_c <= 1
};

// Samples the one-layer aggregation O_i = W((q_s+q_c) X_i +
// (2-q_s-q_c) X_{1-i}) per class, computes the empirical squared DB
// index, and tabulates it against the closed-form bound for each grid
// q_c. Points outside the bound's domain are flagged instead of
// failing.
std::vector<SweepRow> empirical_generalization_sweep(const MixtureSpec& spec_template,
                                                     const std::vector<double>& q_c_grid,
                                                     unsigned threads = 1);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace theory
}  // namespace cthge
