#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "latticetopo/correlation.hpp"
#include "latticetopo/core.hpp"

namespace ltopo {

// Fixed quasi-random shift seed: every orthant-probability evaluation is
// bit-reproducible across runs and thread counts.
inline constexpr uint64_t kMvnSeed = 0x5ca1ab1e0ddba11ull;

struct MvnResult {
  double probability = 0;
  double error = 0;  // reported absolute error bound (3 SE over QMC shifts)
};

struct MvnOptions {
  uint64_t seed = kMvnSeed;
  long min_points = 512;     // per shift, initial batch
  long max_points = 1 << 17; // per shift, adaptive cap
};

// P(Z <= upper) for Z ~ N(0, cov), k = dim(upper) <= 16.  k=1 closed form,
// k=2 deterministic quadrature, k>=3 randomized quasi-Monte Carlo (12 shifted
// Richtmyer sequences, baker reflection) over a variable-reordered Cholesky
// factorization.  Semidefinite directions integrate exactly; a pivot below
// -1e-10 (relative) raises NumericalError.
MvnResult mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& cov,
                  double accuracy, const MvnOptions& opts = {});

// P(site is a local maximum) under the GRF model: orthant probability of the
// neighbor-minus-center differences, with the neighbor set truncated at the
// lattice boundary.  Exact 1/(k+1) when every correlation underflows to zero.
MvnResult extremum_probability(int row, int col, int dim, Neighborhood nbhd,
                               const CorrelationModel& model,
                               double accuracy = 1e-6);

struct ExpectedExtrema {
  double value = 0;
  double mvn_error = 0;
};

// Sum of extremum probabilities over all sites, grouped into boundary
// equivalence classes so only O(1) distinct orthant problems are solved.
ExpectedExtrema expected_extrema(int dim, Neighborhood nbhd,
                                 const CorrelationModel& model,
                                 double accuracy = 1e-6);
// Reference path: one orthant problem per site, no grouping.
ExpectedExtrema expected_extrema_naive(int dim, Neighborhood nbhd,
                                       const CorrelationModel& model,
                                       double accuracy = 1e-6);

struct PairExpectation {
  double value = 0;
  double error = 0;
  bool regularized = false;  // composite covariance needed a diagonal bump
};

// E[I1 I2] for extremum indicators at two sites.  Mutually adjacent sites give
// exactly zero; otherwise the joint orthant probability of both difference
// blocks, valid for disjoint and for shared neighborhoods alike.
PairExpectation pair_indicator_expectation(int r1, int c1, int r2, int c2,
                                           int dim, Neighborhood nbhd,
                                           const CorrelationModel& model,
                                           double accuracy = 1e-6);

struct ExtremaMoments {
  double expected_count = 0;
  double variance = 0;
  double approx_sd = 0;
  int lattice_dim = 0;
  Neighborhood neighborhood = Neighborhood::Cross;
  double delta0 = 3.0;
  double mvn_error_bound = 0;
  bool regularized = false;
};

// Truncated-covariance variance: sum of per-site Bernoulli variances plus
// covariance terms for all pairs within Euclidean distance delta0.  The
// Bernoulli term is boundary-aware (truncated windows per site class); pair
// covariances are evaluated once per displacement for interior window
// geometry and weighted by the in-lattice pair count, so boundary effects
// enter through the Bernoulli term only.  Requires dim >= delta0 + 3.
ExtremaMoments extrema_moments(int dim, Neighborhood nbhd,
                               const CorrelationModel& model,
                               double delta0 = 3.0);

double extrema_variance(int dim, Neighborhood nbhd, const CorrelationModel& model,
                        double delta0 = 3.0);

// Residual of the Gaussian integral identity
//   Phi^(q)(D mu; nu, Delta + D Sigma D^T) =
//     Int Phi^(q)(D y; nu, Delta) phi^(p)(y; mu, Sigma) dy
// with the right side evaluated by Gauss-Hermite quadrature (p <= 2, q <= 3).
// A verification harness, not a runtime dependency.
double gaussian_integral_identity_check(const Eigen::MatrixXd& D,
                                        const Eigen::MatrixXd& Sigma,
                                        const Eigen::MatrixXd& Delta,
                                        const Eigen::VectorXd& mu,
                                        const Eigen::VectorXd& nu,
                                        double accuracy = 1e-8);

}  // namespace ltopo
