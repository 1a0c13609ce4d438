#include "latticetopo/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>
#include <vector>

namespace ltopo {

namespace {

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Gauss-Legendre half tables (6-, 12-, 20-point rules).
constexpr double kGlX[3][10] = {
    {0.9324695142031521, 0.6612093864662645, 0.2386191860831969},
    {0.9815606342467192, 0.9041172563704749, 0.7699026741943047,
     0.5873179542866175, 0.3678314989981802, 0.1252334085114689},
    {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
     0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
     0.5108670019508271, 0.3737060887154195, 0.2277858511416451,
     0.0765265211334973}};
constexpr double kGlW[3][10] = {
    {0.1713244923791704, 0.3607615730481386, 0.4679139345726910},
    {0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
     0.2031674267230659, 0.2334925365383548, 0.2491470458134028},
    {0.0176140071391521, 0.0406014298003869, 0.0626720483341091,
     0.0832767415767048, 0.1019301198172404, 0.1181945319615184,
     0.1316886384491766, 0.1420961093183820, 0.1491729864726037,
     0.1527533871307258}};

// P(X > dh, Y > dk) for standard bivariate normal with correlation r;
// Drezner-Wesolowsky quadrature with the Genz high-correlation expansion.
double bvn_upper(double dh, double dk, double r) {
  constexpr double twopi = 2.0 * std::numbers::pi;
  const double ar = std::abs(r);
  int ng, lg;
  if (ar < 0.3) {
    ng = 0;
    lg = 3;
  } else if (ar < 0.75) {
    ng = 1;
    lg = 6;
  } else {
    ng = 2;
    lg = 10;
  }
  double h = dh, k = dk, hk = h * k, bvn = 0.0;
  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = (h * h + k * k) / 2;
      const double asr = std::asin(r);
      for (int i = 0; i < lg; ++i)
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(asr * (is * kGlX[ng][i] + 1) / 2);
          bvn += kGlW[ng][i] * std::exp((sn * hk - hs) / (1 - sn * sn));
        }
      bvn = bvn * asr / (2 * twopi);
    }
    bvn += norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = (1 - r) * (1 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4 - hk) / 8;
      const double d = (12 - hk) / 16;
      double asr = -(bs / as + hk) / 2;
      if (asr > -100)
        bvn = a * std::exp(asr) *
              (1 - c * (bs - as) * (1 - d * bs / 5) / 3 + c * d * as * as / 5);
      if (-hk < 100) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(twopi) * norm_cdf(-b / a);
        bvn -= std::exp(-hk / 2) * sp * b * (1 - c * bs * (1 - d * bs / 5) / 3);
      }
      a /= 2;
      for (int i = 0; i < lg; ++i)
        for (int is = -1; is <= 1; is += 2) {
          const double xr = a * (is * kGlX[ng][i] + 1);
          const double xs = xr * xr;
          const double rs = std::sqrt(1 - xs);
          asr = -(bs / xs + hk) / 2;
          if (asr > -100) {
            const double sp = 1 + c * xs * (1 + d * xs);
            const double ep = std::exp(-hk * (1 - rs) / (2 * (1 + rs))) / rs;
            bvn += a * kGlW[ng][i] * std::exp(asr) * (ep - sp);
          }
        }
      bvn = -bvn / twopi;
    }
    if (r > 0) {
      bvn += norm_cdf(-std::max(h, k));
    } else {
      bvn = -bvn;
      if (k > h) bvn += norm_cdf(k) - norm_cdf(h);
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

struct CholFactor {
  Eigen::MatrixXd L;
  Eigen::VectorXd b;
};

// Variable-reordered Cholesky (smallest conditional probability first, with
// truncated-normal expectations standing in for the integration variables).
// Semidefinite pivots produce zero columns handled deterministically later.
CholFactor reorder_cholesky(Eigen::MatrixXd c, Eigen::VectorXd b) {
  const int k = static_cast<int>(b.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  std::vector<double> y(k, 0.0);
  const double tol = 1e-10 * std::max(c.diagonal().maxCoeff(), 1.0);

  for (int l = 0; l < k; ++l) {
    int best = -1;
    double best_p = std::numeric_limits<double>::infinity();
    for (int m = l; m < k; ++m) {
      double s2 = c(m, m), num = b(m);
      for (int j = 0; j < l; ++j) {
        s2 -= L(m, j) * L(m, j);
        num -= L(m, j) * y[j];
      }
      if (s2 < -tol)
        throw NumericalError("mvn_cdf: covariance not positive semidefinite");
      const double sd = std::sqrt(std::max(s2, 0.0));
      const double p = sd > 0 ? norm_cdf(num / sd) : (num >= 0 ? 1.0 : 0.0);
      if (p < best_p) {
        best_p = p;
        best = m;
      }
    }
    if (best != l) {
      c.row(l).swap(c.row(best));
      c.col(l).swap(c.col(best));
      std::swap(b(l), b(best));
      for (int j = 0; j < l; ++j) std::swap(L(l, j), L(best, j));
    }

    double s2 = c(l, l), num = b(l);
    for (int j = 0; j < l; ++j) {
      s2 -= L(l, j) * L(l, j);
      num -= L(l, j) * y[j];
    }
    if (s2 < -tol)
      throw NumericalError("mvn_cdf: covariance not positive semidefinite");
    const double diag = std::sqrt(std::max(s2, 0.0));
    L(l, l) = diag;
    if (diag > 0) {
      for (int m = l + 1; m < k; ++m) {
        double v = c(m, l);
        for (int j = 0; j < l; ++j) v -= L(m, j) * L(l, j);
        L(m, l) = v / diag;
      }
      const double bt = num / diag;
      const double e = norm_cdf(bt);
      y[l] = e > 1e-280 ? -norm_pdf(bt) / e : bt;
    }
  }
  return {std::move(L), std::move(b)};
}

// Randomized QMC over the sequential conditional decomposition: 12 shifted
// Richtmyer sequences with baker reflection, extended until the 3-SE bound
// meets `accuracy` or the point cap is reached.
MvnResult qmc_orthant(const CholFactor& f, double accuracy,
                      const MvnOptions& opts) {
  const int k = static_cast<int>(f.b.size());
  const int ndim = k - 1;

  const double e1 = f.L(0, 0) > 0 ? norm_cdf(f.b(0) / f.L(0, 0))
                                  : (f.b(0) >= 0 ? 1.0 : 0.0);
  if (e1 == 0.0) return {0.0, 0.0};

  static constexpr int kPrimes[15] = {2,  3,  5,  7,  11, 13, 17, 19,
                                      23, 29, 31, 37, 41, 43, 47};
  std::array<double, 15> q{};
  for (int j = 0; j < ndim; ++j) {
    const double r = std::sqrt(static_cast<double>(kPrimes[j]));
    q[j] = r - std::floor(r);
  }

  constexpr int n_shift = 12;
  std::array<std::array<double, 15>, n_shift> shift{};
  Rng rng(opts.seed);
  for (auto& s : shift)
    for (int j = 0; j < ndim; ++j) s[j] = rng.uniform();

  std::array<double, n_shift> sums{};
  long count = 0;
  long batch = std::max<long>(opts.min_points, 32);
  std::vector<double> yv(k, 0.0);
  double est = e1, err = 1.0;

  while (true) {
    for (int s = 0; s < n_shift; ++s) {
      std::array<double, 15> x{};
      for (int j = 0; j < ndim; ++j)
        x[j] = std::fmod(static_cast<double>(count + 1) * q[j] + shift[s][j], 1.0);
      double acc = 0.0;
      for (long m = 0; m < batch; ++m) {
        double prod = e1, e_prev = e1;
        for (int l = 1; l < k; ++l) {
          const double w = std::abs(2.0 * x[l - 1] - 1.0);
          const double u =
              std::clamp(w * e_prev, 1e-300, 1.0 - 1e-16);
          yv[l - 1] = norm_quantile(u);
          double num = f.b(l);
          for (int j = 0; j < l; ++j) num -= f.L(l, j) * yv[j];
          const double e = f.L(l, l) > 0 ? norm_cdf(num / f.L(l, l))
                                         : (num >= 0 ? 1.0 : 0.0);
          prod *= e;
          e_prev = e;
          if (prod == 0.0) break;
        }
        acc += prod;
        for (int j = 0; j < ndim; ++j) {
          x[j] += q[j];
          if (x[j] >= 1.0) x[j] -= 1.0;
        }
      }
      sums[s] += acc;
    }
    count += batch;

    est = 0.0;
    for (double s : sums) est += s;
    est /= static_cast<double>(count) * n_shift;
    double var = 0.0;
    for (double s : sums) {
      const double d = s / static_cast<double>(count) - est;
      var += d * d;
    }
    var /= (n_shift - 1);
    err = 3.0 * std::sqrt(var / n_shift);

    if (err <= accuracy || count >= opts.max_points) break;
    batch = count;  // double the budget each round
  }
  return {std::clamp(est, 0.0, 1.0), err};
}

}  // namespace

MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& cov,
                  double accuracy, const MvnOptions& opts) {
  const int k = static_cast<int>(upper.size());
  if (k < 1 || k > 16)
    throw ContractError("mvn_cdf: dimension must lie in [1, 16]");
  if (cov.rows() != k || cov.cols() != k)
    throw ContractError("mvn_cdf: covariance shape mismatch");
  if (accuracy <= 0) throw ContractError("mvn_cdf: accuracy must be positive");

  const Eigen::MatrixXd c = 0.5 * (cov + cov.transpose());
  const double scale = std::max(c.diagonal().maxCoeff(), 1.0);

  // normalize to correlation form, resolving degenerate dimensions exactly
  std::vector<int> keep;
  for (int i = 0; i < k; ++i) {
    const double v = c(i, i);
    if (v < -1e-10 * scale)
      throw NumericalError("mvn_cdf: negative variance entry");
    if (v <= 1e-14 * scale) {
      if (upper(i) < 0) return {0.0, 0.0};
      continue;  // deterministic zero dominated by the bound
    }
    keep.push_back(i);
  }
  const int kk = static_cast<int>(keep.size());
  if (kk == 0) return {1.0, 0.0};

  Eigen::VectorXd b(kk);
  Eigen::MatrixXd corr(kk, kk);
  for (int i = 0; i < kk; ++i) {
    const double si = std::sqrt(c(keep[i], keep[i]));
    b(i) = upper(keep[i]) / si;
    for (int j = 0; j < kk; ++j) {
      const double sj = std::sqrt(c(keep[j], keep[j]));
      const double rho = c(keep[i], keep[j]) / (si * sj);
      if (std::abs(rho) > 1.0 + 1e-10)
        throw NumericalError("mvn_cdf: covariance is not positive semidefinite");
      corr(i, j) = std::clamp(rho, -1.0, 1.0);
    }
    corr(i, i) = 1.0;
  }

  if (kk == 1) return {norm_cdf(b(0)), 1e-15};
  if (kk == 2) return {bvn_upper(-b(0), -b(1), corr(0, 1)), 5e-15};
  return qmc_orthant(reorder_cholesky(std::move(corr), std::move(b)), accuracy,
                     opts);
}

namespace {

std::vector<std::pair<int, int>> clipped_neighbors(int r, int c, int dim,
                                                   Neighborhood nbhd) {
  std::vector<std::pair<int, int>> out;
  for (const auto& off : neighbor_offsets(nbhd)) {
    const int rr = r + off.first, cc = c + off.second;
    if (rr >= 0 && rr < dim && cc >= 0 && cc < dim) out.push_back({rr, cc});
  }
  return out;
}

double site_dist(std::pair<int, int> a, std::pair<int, int> b) {
  return std::hypot(a.first - b.first, a.second - b.second);
}

int boundary_sig(int r, int c, int dim) {
  return (r == 0 ? 1 : 0) | (r == dim - 1 ? 2 : 0) | (c == 0 ? 4 : 0) |
         (c == dim - 1 ? 8 : 0);
}

void check_site(int r, int c, int dim, const char* op) {
  if (dim < 2) throw ContractError(std::string(op) + ": dim must be >= 2");
  if (r < 0 || r >= dim || c < 0 || c >= dim)
    throw ContractError(std::string(op) + ": site outside lattice");
}

}  // namespace

MvnResult extremum_probability(int row, int col, int dim, Neighborhood nbhd,
                               const CorrelationModel& model, double accuracy) {
  check_site(row, col, dim, "extremum_probability");
  const auto nbrs = clipped_neighbors(row, col, dim, nbhd);
  const int k = static_cast<int>(nbrs.size());
  const std::pair<int, int> center{row, col};

  std::vector<double> r_cn(k);
  bool all_zero = true;
  for (int i = 0; i < k; ++i) {
    r_cn[i] = correlation(model, site_dist(center, nbrs[i]));
    if (r_cn[i] != 0.0) all_zero = false;
  }
  Eigen::MatrixXd sigma(k, k);
  for (int i = 0; i < k; ++i) {
    sigma(i, i) = 2.0 - 2.0 * r_cn[i];
    for (int j = i + 1; j < k; ++j) {
      const double r_nn = correlation(model, site_dist(nbrs[i], nbrs[j]));
      if (r_nn != 0.0) all_zero = false;
      sigma(i, j) = sigma(j, i) = r_nn + 1.0 - r_cn[i] - r_cn[j];
    }
  }
  // independent neighbors: the center is the largest of k+1 exchangeable values
  if (all_zero) return {1.0 / (k + 1), 0.0};
  return mvn_cdf(Eigen::VectorXd::Zero(k), sigma, accuracy);
}

namespace {

struct SigClass {
  long mult = 0;
  int rep_row = 0;
  int rep_col = 0;
};

std::map<int, SigClass> site_classes(int dim) {
  std::map<int, SigClass> classes;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      auto [it, fresh] = classes.try_emplace(boundary_sig(r, c, dim));
      if (fresh) {
        it->second.rep_row = r;
        it->second.rep_col = c;
      }
      ++it->second.mult;
    }
  return classes;
}

}  // namespace

ExpectedExtrema expected_extrema(int dim, Neighborhood nbhd,
                                 const CorrelationModel& model, double accuracy) {
  if (dim < 2) throw ContractError("expected_extrema: dim must be >= 2");
  ExpectedExtrema out;
  for (const auto& [sig, cls] : site_classes(dim)) {
    const MvnResult p =
        extremum_probability(cls.rep_row, cls.rep_col, dim, nbhd, model, accuracy);
    out.value += static_cast<double>(cls.mult) * p.probability;
    out.mvn_error += static_cast<double>(cls.mult) * p.error;
  }
  return out;
}

ExpectedExtrema expected_extrema_naive(int dim, Neighborhood nbhd,
                                       const CorrelationModel& model,
                                       double accuracy) {
  if (dim < 2) throw ContractError("expected_extrema: dim must be >= 2");
  ExpectedExtrema out;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const MvnResult p = extremum_probability(r, c, dim, nbhd, model, accuracy);
      out.value += p.probability;
      out.mvn_error += p.error;
    }
  return out;
}

PairExpectation pair_indicator_expectation(int r1, int c1, int r2, int c2,
                                           int dim, Neighborhood nbhd,
                                           const CorrelationModel& model,
                                           double accuracy) {
  check_site(r1, c1, dim, "pair_indicator_expectation");
  check_site(r2, c2, dim, "pair_indicator_expectation");
  if (r1 == r2 && c1 == c2)
    throw ContractError("pair_indicator_expectation: sites must differ");

  const auto offsets = neighbor_offsets(nbhd);
  for (const auto& off : offsets)
    if (r2 - r1 == off.first && c2 - c1 == off.second)
      return {0.0, 0.0, false};  // mutually adjacent: both cannot be maxima

  const std::pair<int, int> c_a{r1, c1}, c_b{r2, c2};
  const auto na = clipped_neighbors(r1, c1, dim, nbhd);
  const auto nb = clipped_neighbors(r2, c2, dim, nbhd);
  const int ka = static_cast<int>(na.size());
  const int k = ka + static_cast<int>(nb.size());

  std::vector<std::pair<int, int>> v = na;
  v.insert(v.end(), nb.begin(), nb.end());
  std::vector<std::pair<int, int>> owner(k);
  for (int i = 0; i < k; ++i) owner[i] = i < ka ? c_a : c_b;

  bool all_zero = true;
  auto rho = [&](std::pair<int, int> a, std::pair<int, int> b) {
    const double d = site_dist(a, b);
    if (d == 0.0) return 1.0;
    const double r = correlation(model, d);
    if (r != 0.0) all_zero = false;
    return r;
  };

  Eigen::MatrixXd sigma(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const double s = rho(v[i], v[j]) - rho(v[i], owner[j]) -
                       rho(owner[i], v[j]) + rho(owner[i], owner[j]);
      sigma(i, j) = sigma(j, i) = s;
    }

  if (all_zero) {
    // with zero correlation everywhere, the indicators are independent unless
    // the closed neighborhoods share a site
    bool disjoint = true;
    for (int i = 0; i < ka && disjoint; ++i) {
      if (v[i] == c_b) disjoint = false;
      for (int j = ka; j < k; ++j)
        if (v[i] == v[j]) {
          disjoint = false;
          break;
        }
    }
    for (int j = ka; j < k; ++j)
      if (v[j] == c_a) disjoint = false;
    if (disjoint)
      return {1.0 / ((ka + 1) * (k - ka + 1)), 0.0, false};
  }

  try {
    const MvnResult r = mvn_cdf(Eigen::VectorXd::Zero(k), sigma, accuracy);
    return {r.probability, r.error, false};
  } catch (const NumericalError&) {
    // genuinely singular composite: regularize and flag
    Eigen::MatrixXd bumped = sigma + 1e-10 * Eigen::MatrixXd::Identity(k, k);
    const MvnResult r = mvn_cdf(Eigen::VectorXd::Zero(k), bumped, accuracy);
    return {r.probability, r.error, true};
  }
}

ExtremaMoments extrema_moments(int dim, Neighborhood nbhd,
                               const CorrelationModel& model, double delta0) {
  if (dim < 2) throw ContractError("extrema_moments: dim must be >= 2");
  if (delta0 < 1) throw ContractError("extrema_moments: delta0 must be >= 1");

  ExtremaMoments out;
  out.lattice_dim = dim;
  out.neighborhood = nbhd;
  out.delta0 = delta0;

  const auto classes = site_classes(dim);
  std::map<int, MvnResult> site_p;
  for (const auto& [sig, cls] : classes) {
    site_p[sig] =
        extremum_probability(cls.rep_row, cls.rep_col, dim, nbhd, model, 1e-6);
    const double p = site_p[sig].probability;
    out.expected_count += static_cast<double>(cls.mult) * p;
    out.variance += static_cast<double>(cls.mult) * p * (1.0 - p);
    out.mvn_error_bound += static_cast<double>(cls.mult) * site_p[sig].error;
  }

  // pair covariances: one composite problem per displacement class, evaluated
  // for interior window geometry and weighted by the in-lattice pair count at
  // that displacement; boundary effects enter through the Bernoulli term only
  const int reach = static_cast<int>(std::floor(delta0));
  if (dim < reach + 3)
    throw ContractError("extrema_moments: dim must be >= delta0 + 3");
  struct Disp {
    int dr, dc;
    long mult;
  };
  std::vector<Disp> disps;
  for (int dr = 0; dr <= reach; ++dr)
    for (int dc = (dr == 0 ? 1 : -reach); dc <= reach; ++dc) {
      if (dr * dr + dc * dc > delta0 * delta0) continue;
      disps.push_back(
          {dr, dc, static_cast<long>(dim - dr) * (dim - std::abs(dc))});
    }

  const MvnResult& p_int = site_p.at(0);
  constexpr double kPairAccuracy = 3e-6;
  std::vector<PairExpectation> results(disps.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < disps.size(); ++i) {
    const int r1 = 1, c1 = 1 + std::max(0, -disps[i].dc);
    results[i] =
        pair_indicator_expectation(r1, c1, r1 + disps[i].dr, c1 + disps[i].dc,
                                   dim, nbhd, model, kPairAccuracy);
  }

  for (size_t i = 0; i < disps.size(); ++i) {
    const double cov = results[i].value - p_int.probability * p_int.probability;
    out.variance += 2.0 * static_cast<double>(disps[i].mult) * cov;
    out.mvn_error_bound +=
        2.0 * static_cast<double>(disps[i].mult) *
        (results[i].error + 2.0 * p_int.error * p_int.probability);
    out.regularized = out.regularized || results[i].regularized;
  }

  if (out.variance <= 0)
    throw NumericalError("extrema_moments: nonpositive variance estimate");
  out.approx_sd = std::sqrt(out.variance);
  return out;
}

double extrema_variance(int dim, Neighborhood nbhd, const CorrelationModel& model,
                        double delta0) {
  return extrema_moments(dim, nbhd, model, delta0).variance;
}

namespace {

// Gauss-Hermite nodes/weights via the symmetric tridiagonal Jacobi matrix.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double off = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    // normalized so that weights sum to 1 (absorbing the 1/sqrt(pi) factor)
    weights[i] = v * v;
  }
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d(i) = std::sqrt(std::max(d(i), 0.0));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double gaussian_integral_identity_check(const Eigen::MatrixXd& D,
                                        const Eigen::MatrixXd& Sigma,
                                        const Eigen::MatrixXd& Delta,
                                        const Eigen::VectorXd& mu,
                                        const Eigen::VectorXd& nu,
                                        double accuracy) {
  const int p = static_cast<int>(mu.size());
  const int q = static_cast<int>(nu.size());
  if (p < 1 || p > 2 || q < 1 || q > 3)
    throw ContractError("gaussian_integral_identity_check: need p <= 2, q <= 3");
  if (D.rows() != q || D.cols() != p || Sigma.rows() != p || Sigma.cols() != p ||
      Delta.rows() != q || Delta.cols() != q)
    throw ContractError("gaussian_integral_identity_check: shape mismatch");

  const Eigen::MatrixXd lhs_cov = Delta + D * Sigma * D.transpose();
  const double lhs = mvn_cdf(D * mu - nu, lhs_cov, accuracy).probability;

  const int n = 48;
  std::vector<double> t, w;
  gauss_hermite(n, t, w);
  const Eigen::MatrixXd a = psd_sqrt(Sigma) * std::sqrt(2.0);

  double rhs = 0.0;
  if (p == 1) {
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd y = mu + a.col(0) * t[i];
      rhs += w[i] * mvn_cdf(D * y - nu, Delta, accuracy).probability;
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd y = mu + a.col(0) * t[i] + a.col(1) * t[j];
        rhs += w[i] * w[j] * mvn_cdf(D * y - nu, Delta, accuracy).probability;
      }
  }
  return std::abs(lhs - rhs);
}

}  // namespace ltopo
