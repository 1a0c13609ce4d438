#include "latticetopo/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace ltopo {

ScalarField detrend_polynomial(const ScalarField& field, int degree) {
  if (degree < 0) throw ContractError("detrend_polynomial: degree must be >= 0");
  const int n = field.size();
  const int terms_per_axis = degree + 1;
  const int terms = terms_per_axis * terms_per_axis;
  if (terms > n)
    throw ContractError("detrend_polynomial: (degree+1)^2 exceeds site count");

  // per-axis coordinates rescaled to [-1, 1]
  auto axis_coord = [](int i, int dim) {
    return dim == 1 ? 0.0 : -1.0 + 2.0 * i / (dim - 1);
  };

  Eigen::MatrixXd design(n, terms);
  Eigen::VectorXd rhs(n);
  std::vector<double> xp(terms_per_axis), yp(terms_per_axis);
  for (int r = 0; r < field.rows; ++r) {
    const double y = axis_coord(r, field.rows);
    yp[0] = 1.0;
    for (int j = 1; j < terms_per_axis; ++j) yp[j] = yp[j - 1] * y;
    for (int c = 0; c < field.cols; ++c) {
      const double x = axis_coord(c, field.cols);
      xp[0] = 1.0;
      for (int i = 1; i < terms_per_axis; ++i) xp[i] = xp[i - 1] * x;
      const int row = r * field.cols + c;
      for (int i = 0; i < terms_per_axis; ++i)
        for (int j = 0; j < terms_per_axis; ++j)
          design(row, i * terms_per_axis + j) = xp[i] * yp[j];
      rhs(row) = field.values[row];
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < terms)
    throw NumericalError("detrend_polynomial: rank-deficient design (rank " +
                         std::to_string(qr.rank()) + " of " + std::to_string(terms) +
                         ")");
  Eigen::VectorXd coef = qr.solve(rhs);
  Eigen::VectorXd resid = rhs - design * coef;

  ScalarField out(field.rows, field.cols);
  out.meta = field.meta;
  for (int i = 0; i < n; ++i) out.values[i] = resid(i);
  return out;
}

ScalarField marginal_gaussianize(const ScalarField& field) {
  const int n = field.size();
  if (n == 0) throw ContractError("marginal_gaussianize: empty field");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return field.values[a] < field.values[b];
  });

  ScalarField out(field.rows, field.cols);
  out.meta = field.meta;
  // mid-ranks over tied runs
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && field.values[order[j + 1]] == field.values[order[i]]) ++j;
    const double mid_rank = 0.5 * (i + j) + 1.0;  // 1-based
    const double z = norm_quantile((mid_rank - 0.5) / n);
    for (int k = i; k <= j; ++k) out.values[order[k]] = z;
    i = j + 1;
  }
  return out;
}

namespace {

struct LagAccum {
  double sum_u = 0, sum_v = 0, sum_uv = 0, sum_uu = 0, sum_vv = 0;
  int64_t count = 0;

  void merge(const LagAccum& o) {
    sum_u += o.sum_u;
    sum_v += o.sum_v;
    sum_uv += o.sum_uv;
    sum_uu += o.sum_uu;
    sum_vv += o.sum_vv;
    count += o.count;
  }
};

// bins keyed by exact squared pixel distance, ascending
EmpiricalCorrelation finalize(const ScalarField& field,
                              const std::vector<std::pair<int, LagAccum>>& bins) {
  EmpiricalCorrelation out;
  out.lags.push_back(0.0);
  out.estimates.push_back(1.0);
  out.counts.push_back(field.size());
  for (const auto& [d2, a] : bins) {
    if (a.count == 0) continue;
    // symmetrized product-moment estimate over pair endpoints
    const double n2 = 2.0 * static_cast<double>(a.count);
    const double mean = (a.sum_u + a.sum_v) / n2;
    const double var = (a.sum_uu + a.sum_vv) / n2 - mean * mean;
    const double cov = a.sum_uv / static_cast<double>(a.count) - mean * mean;
    out.lags.push_back(std::sqrt(static_cast<double>(d2)));
    out.estimates.push_back(var > 0 ? cov / var : 0.0);
    out.counts.push_back(a.count);
  }
  return out;
}

}  // namespace

EmpiricalCorrelation empirical_correlation(const ScalarField& field, double max_lag) {
  if (max_lag <= 0 || max_lag >= std::min(field.rows, field.cols))
    throw ContractError("empirical_correlation: require 0 < max_lag < min(rows, cols)");
  const int reach = static_cast<int>(std::floor(max_lag));
  const double max_d2 = max_lag * max_lag;

  // Enumerate half-plane displacements so each unordered pair appears once;
  // accumulate per displacement, then merge into distance classes in fixed
  // order so the result is identical for any thread count.
  struct Disp {
    int dr, dc, d2;
  };
  std::vector<Disp> disps;
  for (int dr = 0; dr <= reach; ++dr)
    for (int dc = -reach; dc <= reach; ++dc) {
      if (dr == 0 && dc <= 0) continue;
      const int d2 = dr * dr + dc * dc;
      if (d2 > max_d2) continue;
      disps.push_back({dr, dc, d2});
    }

  std::vector<LagAccum> per_disp(disps.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t k = 0; k < disps.size(); ++k) {
    const auto [dr, dc, d2] = disps[k];
    LagAccum acc;
    const int r_hi = field.rows - dr;
    const int c_lo = std::max(0, -dc);
    const int c_hi = std::min(field.cols, field.cols - dc);
    for (int r = 0; r < r_hi; ++r) {
      const double* base = field.values.data() + static_cast<size_t>(r) * field.cols;
      const double* shifted =
          field.values.data() + static_cast<size_t>(r + dr) * field.cols + dc;
      for (int c = c_lo; c < c_hi; ++c) {
        const double u = base[c];
        const double v = shifted[c];
        acc.sum_u += u;
        acc.sum_v += v;
        acc.sum_uv += u * v;
        acc.sum_uu += u * u;
        acc.sum_vv += v * v;
      }
      acc.count += c_hi - c_lo;
    }
    per_disp[k] = acc;
  }

  std::map<int, LagAccum> by_d2;
  for (size_t k = 0; k < disps.size(); ++k) by_d2[disps[k].d2].merge(per_disp[k]);
  return finalize(field, {by_d2.begin(), by_d2.end()});
}

EmpiricalCorrelation empirical_correlation_serial(const ScalarField& field,
                                                  double max_lag) {
  if (max_lag <= 0 || max_lag >= std::min(field.rows, field.cols))
    throw ContractError("empirical_correlation: require 0 < max_lag < min(rows, cols)");
  const double max_d2 = max_lag * max_lag;
  std::map<int, LagAccum> by_d2;

  const int n = field.size();
  for (int a = 0; a < n; ++a) {
    const int ra = a / field.cols, ca = a % field.cols;
    for (int b = a + 1; b < n; ++b) {
      const int rb = b / field.cols, cb = b % field.cols;
      const int d2 = (ra - rb) * (ra - rb) + (ca - cb) * (ca - cb);
      if (d2 > max_d2) continue;
      LagAccum& acc = by_d2[d2];
      const double u = field.values[a], v = field.values[b];
      acc.sum_u += u;
      acc.sum_v += v;
      acc.sum_uv += u * v;
      acc.sum_uu += u * u;
      acc.sum_vv += v * v;
      acc.count += 1;
    }
  }
  return finalize(field, {by_d2.begin(), by_d2.end()});
}

void save_correlation_csv(const EmpiricalCorrelation& corr,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError(path.string() + ": cannot open for writing");
  out << "lag,estimate,pairs\n";
  out.precision(12);
  for (size_t i = 0; i < corr.lags.size(); ++i)
    out << corr.lags[i] << ',' << corr.estimates[i] << ',' << corr.counts[i] << '\n';
}

std::vector<ScalarField> split_subsets(const ScalarField& field, int subset_size,
                                       int buffer) {
  if (subset_size <= 0) throw ContractError("split_subsets: subset_size must be positive");
  if (buffer < 0) throw ContractError("split_subsets: buffer must be nonnegative");
  const int stride = subset_size + buffer;
  const int g_rows = (field.rows + buffer) / stride;
  const int g_cols = (field.cols + buffer) / stride;
  if (g_rows < 1 || g_cols < 1)
    throw ContractError("split_subsets: field too small for one subset");

  std::vector<ScalarField> subsets;
  subsets.reserve(static_cast<size_t>(g_rows) * g_cols);
  for (int gr = 0; gr < g_rows; ++gr)
    for (int gc = 0; gc < g_cols; ++gc) {
      ScalarField sub(subset_size, subset_size);
      const int r0 = gr * stride, c0 = gc * stride;
      for (int r = 0; r < subset_size; ++r)
        for (int c = 0; c < subset_size; ++c)
          sub.at(r, c) = field.at(r0 + r, c0 + c);
      subsets.push_back(std::move(sub));
    }
  return subsets;
}

}  // namespace ltopo
