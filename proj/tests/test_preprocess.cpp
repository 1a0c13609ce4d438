#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "latticetopo/core.hpp"
#include "latticetopo/preprocess.hpp"
#include "test_util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ltopo;

namespace {

// basis-independent least-squares oracle: residual of the projection onto
// span{x^i y^j : 0 <= i,j <= degree} computed by dense QR on raw monomials in
// normalized coordinates (any basis of the same space gives the same residual)
std::vector<double> dense_residual_oracle(const ScalarField& f, int degree) {
  const int n = f.size();
  std::vector<std::pair<int, int>> powers;
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; j <= degree; ++j) powers.emplace_back(i, j);
  Eigen::MatrixXd design(n, static_cast<int>(powers.size()));
  Eigen::VectorXd rhs(n);
  for (int r = 0; r < f.rows; ++r)
    for (int c = 0; c < f.cols; ++c) {
      const int row = r * f.cols + c;
      const double y = f.rows > 1 ? 2.0 * r / (f.rows - 1) - 1.0 : 0.0;
      const double x = f.cols > 1 ? 2.0 * c / (f.cols - 1) - 1.0 : 0.0;
      for (size_t t = 0; t < powers.size(); ++t)
        design(row, static_cast<int>(t)) =
            std::pow(x, powers[t].first) * std::pow(y, powers[t].second);
      rhs(row) = f.at(r, c);
    }
  Eigen::VectorXd resid = rhs - design * design.colPivHouseholderQr().solve(rhs);
  return {resid.data(), resid.data() + n};
}

ScalarField coordinate_field(int rows, int cols,
                             double (*fn)(double, double)) {
  ScalarField f(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) f.at(r, c) = fn(static_cast<double>(c) / cols,
                                                   static_cast<double>(r) / rows);
  return f;
}

}  // namespace

TEST_CASE("detrend removes exact basis members") {
  const ScalarField constant(9, 9, 3.25);
  for (int deg : {0, 2, 4})
    for (double v : detrend_polynomial(constant, deg).values)
      CHECK(std::abs(v) < 1e-12);

  const ScalarField xy =
      coordinate_field(16, 16, [](double x, double y) { return x * y; });
  for (double v : detrend_polynomial(xy, 4).values) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("detrend residual matches dense least-squares oracle") {
  const ScalarField x5 = coordinate_field(
      16, 16, [](double x, double) { return x * x * x * x * x; });
  const auto mine = detrend_polynomial(x5, 4).values;
  const auto oracle = dense_residual_oracle(x5, 4);
  double scale = 0;
  for (double v : oracle) scale = std::max(scale, std::abs(v));
  CHECK(scale > 1e-6);  // x^5 is genuinely outside the degree-4 space
  for (size_t i = 0; i < mine.size(); ++i)
    CHECK(mine[i] == doctest::Approx(oracle[i]).epsilon(1e-7).scale(scale));

  const ScalarField noise = testutil::random_field(12, 17, 911);
  const auto rm = detrend_polynomial(noise, 3).values;
  const auto ro = dense_residual_oracle(noise, 3);
  for (size_t i = 0; i < rm.size(); ++i)
    CHECK(rm[i] == doctest::Approx(ro[i]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("detrend residual is orthogonal to the fitted space") {
  const ScalarField f = testutil::random_field(14, 11, 912);
  const ScalarField res = detrend_polynomial(f, 2);
  for (int pi = 0; pi <= 2; ++pi)
    for (int pj = 0; pj <= 2; ++pj) {
      double dot = 0;
      for (int r = 0; r < f.rows; ++r)
        for (int c = 0; c < f.cols; ++c) {
          const double y = 2.0 * r / (f.rows - 1) - 1.0;
          const double x = 2.0 * c / (f.cols - 1) - 1.0;
          dot += res.at(r, c) * std::pow(x, pi) * std::pow(y, pj);
        }
      CHECK(std::abs(dot) < 1e-8 * f.size());
    }
}

TEST_CASE("detrend rank deficiency raises") {
  // two distinct row coordinates cannot identify a quadratic in y
  const ScalarField thin = testutil::random_field(2, 5, 913);
  CHECK_THROWS_AS(detrend_polynomial(thin, 2), NumericalError);
  CHECK_THROWS_AS(detrend_polynomial(thin, -1), ContractError);
}

TEST_CASE("gaussianize rank formula") {
  ScalarField f(1, 4);
  f.values = {10.0, 20.0, 30.0, 40.0};
  const auto g = marginal_gaussianize(f);
  const double expect[4] = {norm_quantile(0.125), norm_quantile(0.375),
                            norm_quantile(0.625), norm_quantile(0.875)};
  for (int i = 0; i < 4; ++i) CHECK(g.values[i] == expect[i]);

  // order statistics are the same regardless of input arrangement
  ScalarField shuffled(1, 4);
  shuffled.values = {30.0, 10.0, 40.0, 20.0};
  const auto h = marginal_gaussianize(shuffled);
  CHECK(h.values == std::vector<double>{expect[2], expect[0], expect[3],
                                        expect[1]});
}

TEST_CASE("gaussianize ties and idempotence") {
  const ScalarField constant(3, 3, 7.0);
  for (double v : marginal_gaussianize(constant).values) CHECK(v == 0.0);

  const ScalarField f = testutil::random_field(20, 20, 914);
  const auto once = marginal_gaussianize(f);
  const auto twice = marginal_gaussianize(once);
  CHECK(once.values == twice.values);  // rank-preserving map is idempotent

  ScalarField empty;
  CHECK_THROWS_AS(marginal_gaussianize(empty), ContractError);
}

TEST_CASE("empirical correlation lag zero and iid bound") {
  const ScalarField f = testutil::random_field(128, 128, 915);
  const auto corr = empirical_correlation(f, 10.0);
  CHECK(corr.lags[0] == 0.0);
  CHECK(corr.estimates[0] == 1.0);
  CHECK(corr.counts[0] == f.size());
  for (size_t i = 1; i < corr.lags.size(); ++i) {
    CHECK(corr.counts[i] > 0);
    CHECK(std::abs(corr.estimates[i]) <=
          3.0 / std::sqrt(static_cast<double>(corr.counts[i])));
  }
}

TEST_CASE("empirical correlation distance classes are exact") {
  const ScalarField f = testutil::random_field(20, 20, 921);
  const auto corr = empirical_correlation(f, 3.0);
  const std::vector<double> want = {0.0,           1.0, std::sqrt(2.0), 2.0,
                                    std::sqrt(5.0), std::sqrt(8.0), 3.0};
  REQUIRE(corr.lags == want);
  for (size_t i = 1; i < corr.lags.size(); ++i)
    CHECK(corr.lags[i] > corr.lags[i - 1]);
  // pair counts by displacement class: 2 axis classes at lag 1 and 3, the
  // diagonal/knight classes in between
  CHECK(corr.counts[1] == 2 * 20 * 19);
  CHECK(corr.counts[2] == 2 * 19 * 19);
  CHECK(corr.counts[3] == 2 * 20 * 18);
  CHECK(corr.counts[4] == 4 * 19 * 18);
  CHECK(corr.counts[5] == 2 * 18 * 18);
  CHECK(corr.counts[6] == 2 * 20 * 17);
}

TEST_CASE("empirical correlation serial matches parallel") {
  const ScalarField f = testutil::random_field(48, 48, 916);
  const auto par = empirical_correlation(f, 6.0);
  const auto ser = empirical_correlation_serial(f, 6.0);
  REQUIRE(par.lags == ser.lags);
  REQUIRE(par.counts == ser.counts);
  for (size_t i = 0; i < par.estimates.size(); ++i)
    CHECK(par.estimates[i] ==
          doctest::Approx(ser.estimates[i]).epsilon(1e-12));
}

TEST_CASE("empirical correlation is thread-count invariant") {
#ifdef _OPENMP
  const ScalarField f = testutil::random_field(64, 64, 917);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = empirical_correlation(f, 8.0);
  omp_set_num_threads(3);
  const auto three = empirical_correlation(f, 8.0);
  omp_set_num_threads(saved);
  CHECK(one.estimates == three.estimates);  // bit-exact merge order
#endif
}

TEST_CASE("empirical correlation affine invariance") {
  const ScalarField f = testutil::random_field(40, 40, 918);
  ScalarField scaled = f;
  for (auto& v : scaled.values) v *= 4.0;  // power of two: exact in binary fp
  CHECK(empirical_correlation(f, 5.0).estimates ==
        empirical_correlation(scaled, 5.0).estimates);

  ScalarField affine = f;
  for (auto& v : affine.values) v = 2.5 * v - 17.0;
  const auto a = empirical_correlation(f, 5.0);
  const auto b = empirical_correlation(affine, 5.0);
  for (size_t i = 0; i < a.estimates.size(); ++i)
    CHECK(a.estimates[i] == doctest::Approx(b.estimates[i]).epsilon(1e-9));
}

TEST_CASE("empirical correlation validates max_lag") {
  const ScalarField f = testutil::random_field(16, 16, 919);
  CHECK_THROWS_AS(empirical_correlation(f, 0.0), ContractError);
  CHECK_THROWS_AS(empirical_correlation(f, 16.0), ContractError);
}

TEST_CASE("split subsets canonical tiling") {
  const ScalarField f = testutil::random_field(256, 256, 920);
  const auto subs = split_subsets(f, 64, 32);
  REQUIRE(subs.size() == 9);
  const int offs[3] = {0, 96, 192};
  for (int gr = 0; gr < 3; ++gr)
    for (int gc = 0; gc < 3; ++gc) {
      const ScalarField& s = subs[gr * 3 + gc];
      REQUIRE(s.rows == 64);
      REQUIRE(s.cols == 64);
      CHECK(s.at(0, 0) == f.at(offs[gr], offs[gc]));
      CHECK(s.at(63, 63) == f.at(offs[gr] + 63, offs[gc] + 63));
    }
}

TEST_CASE("split subsets degenerate and invalid cases") {
  const ScalarField whole = testutil::random_field(64, 64, 921);
  const auto one = split_subsets(whole, 64, 32);
  REQUIRE(one.size() == 1);
  CHECK(one[0].values == whole.values);

  const ScalarField f100 = testutil::random_field(100, 100, 922);
  CHECK(split_subsets(f100, 64, 32).size() == 1);

  CHECK_THROWS_AS(split_subsets(whole, 0, 32), ContractError);
  CHECK_THROWS_AS(split_subsets(whole, 64, -1), ContractError);
  CHECK_THROWS_AS(split_subsets(testutil::random_field(32, 32, 923), 64, 32),
                  ContractError);
}
