#include "cthge/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cthge/error.hpp"
#include "cthge/parallel.hpp"
#include "cthge/rng.hpp"
#include "cthge/text.hpp"

namespace cthge {
namespace theory {

void MixtureSpec::validate_shapes() const {
  std::size_t d = mu_x0.size();
  if (d == 0 || mu_x1.size() != d || w.rows != d || w.cols != d) {
    throw DimensionError("mixture spec: mean vectors and W must share one dimension");
  }
  if (mu_x0 == mu_x1) {
    throw ConfigError("mixture spec: class means must differ");
  }
  if (sigma0 < 0.0 || sigma1 < 0.0) throw ConfigError("mixture spec: negative covariance scale");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("mixture spec: lambda must lie in [0, 1]");
  if (samples < 1) throw ConfigError("mixture spec: samples must be positive");
}

void MixtureSpec::validate_domain() const {
  if (!(q_s + q_c > 1.0)) {
    throw DomainError("bound requires q_s + q_c > 1 (got " + fmt_double(q_s) + " + " +
                      fmt_double(q_c) + ")");
  }
}

std::vector<double> MixtureSpec::non_target_mean() const {
  std::vector<double> mu(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    mu[i] = lambda * mu_x0[i] + (1.0 - lambda) * mu_x1[i];
  }
  return mu;
}

namespace {

std::vector<double> centroid(const Matrix& reps) {
  std::vector<double> mu(reps.cols, 0.0);
  for (std::size_t i = 0; i < reps.rows; ++i) {
    const double* row = reps.row(i);
    for (std::size_t j = 0; j < reps.cols; ++j) mu[j] += row[j];
  }
  for (double& v : mu) v /= static_cast<double>(reps.rows);
  return mu;
}

double p_norm(const double* a, const double* b, std::size_t n, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::pow(std::abs(a[i] - b[i]), p);
  return std::pow(acc, 1.0 / p);
}

struct ClassStats {
  std::vector<std::vector<double>> centroids;
  // Mean p-th power of the deviation norm, before the 1/p root.
  std::vector<double> scatter_p;
};

ClassStats class_stats(const std::vector<Matrix>& class_reps, double p) {
  if (class_reps.size() < 2) throw ValidationError("db_index needs at least 2 classes");
  ClassStats st;
  for (const Matrix& reps : class_reps) {
    if (reps.rows == 0) throw ValidationError("db_index: empty class");
    st.centroids.push_back(centroid(reps));
  }
  for (std::size_t c = 0; c < class_reps.size(); ++c) {
    const Matrix& reps = class_reps[c];
    double acc = 0.0;
    for (std::size_t i = 0; i < reps.rows; ++i) {
      acc += std::pow(p_norm(reps.row(i), st.centroids[c].data(), reps.cols, p), p);
    }
    st.scatter_p.push_back(acc / static_cast<double>(reps.rows));
  }
  return st;
}

ComplexityReport db_from_stats(const ClassStats& st, double p, bool squared) {
  std::size_t k = st.centroids.size();
  ComplexityReport rep;
  rep.inter.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    double s = std::pow(st.scatter_p[i], 1.0 / p);
    rep.intra.push_back(squared ? s * s : s);
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double m = p_norm(st.centroids[i].data(), st.centroids[j].data(),
                        st.centroids[i].size(), p);
      if (m == 0.0) {
        throw NumericError("db_index: classes " + std::to_string(i) + " and " +
                           std::to_string(j) + " have coincident centroids");
      }
      rep.inter[i][j] = m;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double ratio = squared
                         ? (rep.intra[i] + rep.intra[j]) / (rep.inter[i][j] * rep.inter[i][j])
                         : (rep.intra[i] + rep.intra[j]) / rep.inter[i][j];
      worst = std::max(worst, ratio);
    }
    total += worst;
  }
  rep.value = total / static_cast<double>(k);
  return rep;
}

}  // namespace

ComplexityReport db_index(const std::vector<Matrix>& class_reps, double p) {
  if (!(p >= 1.0)) throw ConfigError("db_index: norm order p must be >= 1");
  return db_from_stats(class_stats(class_reps, p), p, /*squared=*/false);
}

ComplexityReport db_index_squared(const std::vector<Matrix>& class_reps) {
  return db_from_stats(class_stats(class_reps, 2.0), 2.0, /*squared=*/true);
}

namespace {

double trace_wwt(const Matrix& w) {
  double acc = 0.0;
  for (double v : w.data) acc += v * v;  // tr(W W^T) = sum of squares
  return acc;
}

double w_delta_norm_sq(const MixtureSpec& spec) {
  std::size_t d = spec.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row_dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      row_dot += spec.w.at(i, j) * (spec.mu_x0[j] - spec.mu_x1[j]);
    }
    acc += row_dot * row_dot;
  }
  return acc;
}

}  // namespace

BoundResult lower_bound(const MixtureSpec& spec) {
  spec.validate_shapes();
  spec.validate_domain();
  double denom = w_delta_norm_sq(spec);
  if (denom == 0.0) {
    throw NumericError("lower_bound: W collapses the class means (||W(mu0-mu1)|| = 0)");
  }
  // E[dX^T W W^T dX] = sigma^2 tr(W W^T) for isotropic dX.
  double c0 = 2.0 * (spec.sigma0 * spec.sigma0 + spec.sigma1 * spec.sigma1) * trace_wwt(spec.w) /
              denom;
  double u = 2.0 * spec.q_s + 2.0 * spec.q_c - 2.0;
  return BoundResult{c0, c0 / (u * u)};
}

double lower_bound_derivative(const MixtureSpec& spec) {
  BoundResult b = lower_bound(spec);
  double u = 2.0 * spec.q_s + 2.0 * spec.q_c - 2.0;
  return -4.0 * b.c0 / (u * u * u);
}

namespace {

// One aggregated sample per class: O_c = W((q_s+q_c) x_c + (2-q_s-q_c) x_other).
void sample_classes(const MixtureSpec& spec, RandomStream& rng, Matrix& class0, Matrix& class1) {
  std::size_t d = spec.dim();
  double a = spec.q_s + spec.q_c;
  double b = 2.0 - a;
  std::vector<double> x0(d), x1(d), mix(d);
  std::int64_t n = spec.samples;
  class0 = Matrix(static_cast<std::size_t>(n), d);
  class1 = Matrix(static_cast<std::size_t>(n), d);
  for (std::int64_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < d; ++j) {
      x0[j] = rng.normal(spec.mu_x0[j], spec.sigma0);
      x1[j] = rng.normal(spec.mu_x1[j], spec.sigma1);
    }
    for (int cls = 0; cls < 2; ++cls) {
      const std::vector<double>& own = cls == 0 ? x0 : x1;
      const std::vector<double>& other = cls == 0 ? x1 : x0;
      for (std::size_t j = 0; j < d; ++j) mix[j] = a * own[j] + b * other[j];
      double* out = (cls == 0 ? class0 : class1).row(static_cast<std::size_t>(s));
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += spec.w.at(i, j) * mix[j];
        out[i] = acc;
      }
    }
  }
}

}  // namespace

std::vector<SweepRow> empirical_generalization_sweep(const MixtureSpec& spec_template,
                                                     const std::vector<double>& q_c_grid,
                                                     unsigned threads) {
  spec_template.validate_shapes();
  std::vector<SweepRow> rows(q_c_grid.size());
  parallel_for(q_c_grid.size(), threads, [&](std::size_t gi) {
    MixtureSpec spec = spec_template;
    spec.q_c = q_c_grid[gi];
    SweepRow row;
    row.q_c = spec.q_c;

    RandomStream rng(derive_seed(spec.seed, gi));
    Matrix class0, class1;
    sample_classes(spec, rng, class0, class1);
    bool db_ok = true;
    try {
      row.db_index = db_index_squared({class0, class1}).value;
    } catch (const NumericError&) {
      // q_s + q_c = 1 collapses the aggregated centroids onto each other.
      row.db_index = std::nan("");
      db_ok = false;
    }

    // Batch-means standard error over 10 contiguous batches.
    constexpr std::size_t kBatches = 10;
    std::size_t n = class0.rows;
    if (db_ok && n >= kBatches * 2) {
      std::vector<double> batch_vals;
      std::size_t batch = n / kBatches;
      for (std::size_t b = 0; b < kBatches; ++b) {
        Matrix c0(batch, class0.cols), c1(batch, class1.cols);
        for (std::size_t i = 0; i < batch; ++i) {
          std::copy(class0.row(b * batch + i), class0.row(b * batch + i) + class0.cols, c0.row(i));
          std::copy(class1.row(b * batch + i), class1.row(b * batch + i) + class1.cols, c1.row(i));
        }
        batch_vals.push_back(db_index_squared({c0, c1}).value);
      }
      double mean = pairwise_sum(batch_vals) / static_cast<double>(kBatches);
      double var = 0.0;
      for (double v : batch_vals) var += (v - mean) * (v - mean);
      var /= static_cast<double>(kBatches - 1);
      row.db_stderr = std::sqrt(var / static_cast<double>(kBatches));
    }

    if (spec.q_s + spec.q_c > 1.0) {
      BoundResult bound = lower_bound(spec);
      row.c_lower = bound.c_lower;
      row.c0 = bound.c0;
    } else {
      row.domain_ok = false;
    }
    rows[gi] = row;
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "q_c,db_index,c_lower,c0\n";
  for (const SweepRow& r : rows) {
    out += fmt_double(r.q_c);
    out += ',';
    out += fmt_double(r.db_index);
    out += ',';
    out += r.domain_ok ? fmt_double(r.c_lower) : "domain_error";
    out += ',';
    out += r.domain_ok ? fmt_double(r.c0) : "domain_error";
    out += '\n';
  }
  return out;
}

}  // namespace theory
}  // namespace cthge
