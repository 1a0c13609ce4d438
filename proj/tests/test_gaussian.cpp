#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "latticetopo/gaussian.hpp"
#include "test_util.hpp"

using namespace ltopo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double erfc_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// correlation length so short that every lattice correlation underflows to
// zero: probabilities reduce to window combinatorics
CorrelationModel iid_model() { return exponential_model(1e-3); }

MatrixXd random_correlation(int k, uint64_t seed) {
  Rng rng(seed);
  MatrixXd a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = rng.normal();
  MatrixXd cov = a * a.transpose() + 0.4 * MatrixXd::Identity(k, k);
  VectorXd s = cov.diagonal().cwiseSqrt();
  return cov.array() / (s * s.transpose()).array();
}

}  // namespace

TEST_CASE("orthant probabilities match closed forms") {
  VectorXd u1(1);
  MatrixXd c1 = MatrixXd::Identity(1, 1);
  u1 << 0.0;
  CHECK(mvn_cdf(u1, c1, 1e-9).probability == doctest::Approx(0.5).epsilon(1e-12));
  u1 << 0.7;
  CHECK(mvn_cdf(u1, c1, 1e-9).probability ==
        doctest::Approx(erfc_cdf(0.7)).epsilon(1e-10));
  c1 << 4.0;
  CHECK(mvn_cdf(u1, c1, 1e-9).probability ==
        doctest::Approx(erfc_cdf(0.35)).epsilon(1e-10));

  // bivariate: P(Z1<=0, Z2<=0) = 1/4 + asin(rho) / (2 pi)
  VectorXd u2 = VectorXd::Zero(2);
  MatrixXd c2(2, 2);
  c2 << 1, 0.5, 0.5, 1;
  CHECK(mvn_cdf(u2, c2, 1e-9).probability ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  c2 << 1, 0, 0, 1;
  u2 << 0.3, -0.4;
  CHECK(mvn_cdf(u2, c2, 1e-9).probability ==
        doctest::Approx(erfc_cdf(0.3) * erfc_cdf(-0.4)).epsilon(1e-8));

  // trivariate orthant: 1/8 + sum of pairwise asin terms / (4 pi)
  VectorXd u3 = VectorXd::Zero(3);
  MatrixXd c3(3, 3);
  c3 << 1, 0.5, 0.5, 0.5, 1, 0.5, 0.5, 0.5, 1;
  const auto equi = mvn_cdf(u3, c3, 1e-7);
  CHECK(std::abs(equi.probability - 0.25) <= equi.error + 1e-6);
  for (int trial = 0; trial < 8; ++trial) {
    const MatrixXd r = random_correlation(3, 900 + trial);
    const double exact =
        0.125 + (std::asin(r(0, 1)) + std::asin(r(0, 2)) + std::asin(r(1, 2))) /
                    (4.0 * std::numbers::pi);
    const auto res = mvn_cdf(u3, r, 1e-7);
    CHECK(std::abs(res.probability - exact) <= res.error + 2e-6);
  }

  // independence: orthant mass 2^-k
  for (int k = 1; k <= 6; ++k) {
    const auto res =
        mvn_cdf(VectorXd::Zero(k), MatrixXd::Identity(k, k), 1e-7);
    CHECK(std::abs(res.probability - std::ldexp(1.0, -k)) <=
          res.error + 2e-6);
  }
}

TEST_CASE("mvn_cdf input contracts") {
  CHECK_THROWS_AS(mvn_cdf(VectorXd::Zero(0), MatrixXd::Identity(0, 0), 1e-6),
                  ContractError);
  CHECK_THROWS_AS(mvn_cdf(VectorXd::Zero(17), MatrixXd::Identity(17, 17), 1e-6),
                  ContractError);
  CHECK_THROWS_AS(mvn_cdf(VectorXd::Zero(3), MatrixXd::Identity(2, 2), 1e-6),
                  ContractError);
  CHECK_THROWS_AS(mvn_cdf(VectorXd::Zero(2), MatrixXd::Identity(2, 2), 0.0),
                  ContractError);
  MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(mvn_cdf(VectorXd::Zero(2), indefinite, 1e-6), NumericalError);
}

TEST_CASE("reported mvn error bounds cover loose-vs-tight differences") {
  int covered = 0;
  Rng rng(1000);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd r = random_correlation(4, 1100 + trial);
    VectorXd u(4);
    for (int i = 0; i < 4; ++i) u(i) = -1.0 + 2.5 * rng.uniform();
    const auto loose = mvn_cdf(u, r, 5e-5);
    const auto tight = mvn_cdf(u, r, 1e-7);
    CHECK(loose.probability >= 0.0);
    CHECK(loose.probability <= 1.0);
    if (std::abs(loose.probability - tight.probability) <=
        loose.error + tight.error)
      ++covered;
  }
  CHECK(covered >= 95);
}

TEST_CASE("extremum probabilities reduce to window combinatorics for iid") {
  const auto model = iid_model();
  struct Case {
    int row, col, window;
  };
  // interior, edge, corner window sizes for each neighborhood
  for (const Case c : {Case{6, 6, 4}, Case{0, 6, 3}, Case{0, 0, 2}}) {
    const auto res = extremum_probability(c.row, c.col, 12, Neighborhood::Cross,
                                          model);
    CHECK(res.probability == 1.0 / (c.window + 1));
    CHECK(res.error == 0.0);
  }
  for (const Case c : {Case{6, 6, 8}, Case{0, 6, 5}, Case{0, 0, 3}}) {
    const auto res = extremum_probability(c.row, c.col, 12,
                                          Neighborhood::Square, model);
    CHECK(res.probability == 1.0 / (c.window + 1));
    CHECK(res.error == 0.0);
  }
  CHECK_THROWS_AS(extremum_probability(12, 0, 12, Neighborhood::Cross, model),
                  ContractError);
  CHECK_THROWS_AS(extremum_probability(0, -1, 12, Neighborhood::Cross, model),
                  ContractError);
  CHECK_THROWS_AS(extremum_probability(0, 0, 1, Neighborhood::Cross, model),
                  ContractError);
}

TEST_CASE("pair indicator expectations match iid combinatorics") {
  const auto model = iid_model();
  const int d = 12, r = 5, c = 5;

  // mutually adjacent sites can never both be strict maxima
  for (auto nbhd : {Neighborhood::Cross, Neighborhood::Square}) {
    const auto res = pair_indicator_expectation(r, c, r, c + 1, d, nbhd, model);
    CHECK(res.value == 0.0);
    CHECK(res.error == 0.0);
  }
  const auto diag =
      pair_indicator_expectation(r, c, r + 1, c + 1, d, Neighborhood::Square,
                                 model);
  CHECK(diag.value == 0.0);

  // interior displacement classes, exact joint probabilities
  struct Case {
    Neighborhood nbhd;
    int dr, dc;
    double expect;
  };
  const Case cases[] = {
      {Neighborhood::Cross, 1, 1, 1.0 / 20},
      {Neighborhood::Cross, 0, 2, 2.0 / 45},
      {Neighborhood::Cross, 1, 2, 1.0 / 25},
      {Neighborhood::Cross, 2, 2, 1.0 / 25},
      {Neighborhood::Cross, 0, 3, 1.0 / 25},
      {Neighborhood::Square, 0, 2, 2.0 / 135},
      {Neighborhood::Square, 1, 2, 1.0 / 72},
      {Neighborhood::Square, 2, 2, 2.0 / 153},
      {Neighborhood::Square, 0, 3, 1.0 / 81},
  };
  for (const auto& k : cases) {
    const auto res = pair_indicator_expectation(r, c, r + k.dr, c + k.dc, d,
                                                k.nbhd, model, 1e-6);
    CHECK(std::abs(res.value - k.expect) <= res.error + 2e-6);
    CHECK(!res.regularized);
    const auto swapped = pair_indicator_expectation(r + k.dr, c + k.dc, r, c, d,
                                                    k.nbhd, model, 1e-6);
    CHECK(std::abs(swapped.value - res.value) <=
          swapped.error + res.error + 1e-9);
  }
  CHECK_THROWS_AS(
      pair_indicator_expectation(3, 3, 3, 3, d, Neighborhood::Cross, model),
      ContractError);
}

TEST_CASE("moment assembly matches an independent combinatorial sum") {
  const auto model = iid_model();
  const int d = 12;
  const double delta0 = 3.0;

  for (auto nbhd : {Neighborhood::Cross, Neighborhood::Square}) {
    const bool cross = nbhd == Neighborhood::Cross;
    // window sizes: interior / edge / corner
    const int wi = cross ? 4 : 8, we = cross ? 3 : 5, wc = cross ? 2 : 3;
    const double pi = 1.0 / (wi + 1), pe = 1.0 / (we + 1), pc = 1.0 / (wc + 1);
    const double n_int = (d - 2.0) * (d - 2.0), n_edge = 4.0 * (d - 2.0);
    const double expect = n_int * pi + n_edge * pe + 4.0 * pc;
    double var = n_int * pi * (1 - pi) + n_edge * pe * (1 - pe) +
                 4.0 * pc * (1 - pc);

    // exact interior-pair covariances by displacement class
    const auto cov_of = [cross](int dr, int dc) {
      const int lo = std::min(dr, std::abs(dc)), hi = std::max(dr, std::abs(dc));
      if (cross) {
        if (lo == 0 && hi == 1) return -1.0 / 25;
        if (lo == 1 && hi == 1) return 1.0 / 100;
        if (lo == 0 && hi == 2) return 1.0 / 225;
        return 0.0;
      }
      if (hi == 1) return -1.0 / 81;
      if (lo == 0 && hi == 2) return 1.0 / 405;
      if (lo == 1 && hi == 2) return 1.0 / 648;
      if (lo == 2 && hi == 2) return 1.0 / 1377;
      return 0.0;
    };
    for (int dr = 0; dr <= 3; ++dr)
      for (int dc = (dr == 0 ? 1 : -3); dc <= 3; ++dc) {
        if (dr * dr + dc * dc > delta0 * delta0) continue;
        var += 2.0 * (d - dr) * (d - std::abs(dc)) * cov_of(dr, dc);
      }

    const auto m = extrema_moments(d, nbhd, model, delta0);
    CHECK(m.expected_count == doctest::Approx(expect).epsilon(1e-13));
    CHECK(std::abs(m.variance - var) <= m.mvn_error_bound + 0.02);
    CHECK(m.approx_sd == doctest::Approx(std::sqrt(m.variance)).epsilon(1e-13));
    CHECK(m.lattice_dim == d);
    CHECK(m.neighborhood == nbhd);
    CHECK(m.delta0 == delta0);
    CHECK(!m.regularized);
    CHECK(extrema_variance(d, nbhd, model, delta0) ==
          doctest::Approx(m.variance).epsilon(1e-12));
  }

  CHECK_THROWS_AS(extrema_moments(5, Neighborhood::Cross, model, 3.0),
                  ContractError);
  CHECK_THROWS_AS(extrema_moments(32, Neighborhood::Cross, model, 0.5),
                  ContractError);
  CHECK_THROWS_AS(extrema_moments(1, Neighborhood::Cross, model, 3.0),
                  ContractError);
}

TEST_CASE("grouped expectation equals the per-site reference") {
  const auto model = exponential_model(10.0);
  for (auto nbhd : {Neighborhood::Cross, Neighborhood::Square}) {
    const auto grouped = expected_extrema(8, nbhd, model, 1e-5);
    const auto naive = expected_extrema_naive(8, nbhd, model, 1e-5);
    CHECK(std::abs(grouped.value - naive.value) <=
          grouped.mvn_error + naive.mvn_error);
  }
  CHECK_THROWS_AS(expected_extrema(1, Neighborhood::Cross, model),
                  ContractError);
  CHECK_THROWS_AS(expected_extrema_naive(0, Neighborhood::Cross, model),
                  ContractError);
}

TEST_CASE("smoother fields have fewer expected extrema") {
  double prev_cross = std::numeric_limits<double>::infinity();
  for (const double eta : {5.0, 10.0, 20.0, 40.0}) {
    const auto model = exponential_model(eta);
    const double cross = expected_extrema(32, Neighborhood::Cross, model).value;
    const double square =
        expected_extrema(32, Neighborhood::Square, model).value;
    CHECK(cross < prev_cross);
    CHECK(square < cross);  // stricter window admits fewer maxima
    prev_cross = cross;
  }
}

TEST_CASE("gaussian integral identity residuals") {
  MatrixXd d11 = MatrixXd::Constant(1, 1, 1.0);
  MatrixXd one = MatrixXd::Identity(1, 1);
  VectorXd z1 = VectorXd::Zero(1);
  CHECK(gaussian_integral_identity_check(d11, one, one, z1, z1) < 1e-8);

  // q = 2, p = 1
  MatrixXd d21(2, 1);
  d21 << 1.0, -0.5;
  MatrixXd delta2(2, 2);
  delta2 << 1.0, 0.3, 0.3, 1.0;
  MatrixXd sigma1 = MatrixXd::Constant(1, 1, 0.8);
  VectorXd mu1 = VectorXd::Constant(1, 0.2);
  VectorXd nu2(2);
  nu2 << -0.1, 0.4;
  CHECK(gaussian_integral_identity_check(d21, sigma1, delta2, mu1, nu2) < 1e-6);

  // D = 0 collapses both sides to the same constant
  MatrixXd d0 = MatrixXd::Zero(2, 2);
  MatrixXd sigma2 = MatrixXd::Identity(2, 2);
  MatrixXd delta22(2, 2);
  delta22 << 2.0, 0.5, 0.5, 1.0;
  VectorXd mu2(2), nu22(2);
  mu2 << 1.0, -1.0;
  nu22 << 0.3, 0.3;
  CHECK(gaussian_integral_identity_check(d0, sigma2, delta22, mu2, nu22) <
        1e-10);

  // q = 2, p = 2, generic PSD inputs
  Rng rng(1200);
  MatrixXd b(2, 2), cmat(2, 2), d22(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      b(i, j) = rng.normal();
      cmat(i, j) = rng.normal();
      d22(i, j) = rng.normal();
    }
  MatrixXd sig = b * b.transpose() + 0.1 * MatrixXd::Identity(2, 2);
  MatrixXd del = cmat * cmat.transpose() + 0.1 * MatrixXd::Identity(2, 2);
  VectorXd mu(2), nu(2);
  mu << rng.normal(), rng.normal();
  nu << rng.normal(), rng.normal();
  CHECK(gaussian_integral_identity_check(d22, sig, del, mu, nu) < 1e-6);

  CHECK_THROWS_AS(gaussian_integral_identity_check(
                      MatrixXd::Zero(1, 3), MatrixXd::Identity(3, 3), one,
                      VectorXd::Zero(3), z1),
                  ContractError);
  CHECK_THROWS_AS(gaussian_integral_identity_check(
                      MatrixXd::Zero(4, 1), one, MatrixXd::Identity(4, 4), z1,
                      VectorXd::Zero(4)),
                  ContractError);
  CHECK_THROWS_AS(gaussian_integral_identity_check(d21, sigma2, delta2, mu2,
                                                   nu2),
                  ContractError);
}
