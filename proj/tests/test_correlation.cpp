#include <cmath>

#include "doctest.h"
#include "latticetopo/correlation.hpp"
#include "latticetopo/core.hpp"

using namespace ltopo;

TEST_CASE("exponential correlation closed form") {
  const CorrelationModel m = exponential_model(20.0);
  CHECK(correlation(m, 0.0) == 1.0);
  CHECK(correlation(m, 5.0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-13));
  CHECK(correlation(m, 20.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  // strictly decreasing in distance
  double prev = 1.0;
  for (double d : {0.5, 1.0, 3.0, 10.0, 50.0, 200.0}) {
    const double c = correlation(m, d);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("matern nu=1/2 reduces to exponential") {
  for (double eta : {5.0, 20.0}) {
    const CorrelationModel mat = matern_model(0.5, eta);
    const CorrelationModel exp = exponential_model(eta);
    for (double d : {0.1, 1.0, 5.5, 20.0, 100.0})
      CHECK(correlation(mat, d) ==
            doctest::Approx(correlation(exp, d)).epsilon(1e-10));
  }
}

TEST_CASE("matern half-integer closed forms") {
  // nu = 3/2: (1 + a) e^{-a},  nu = 5/2: (1 + a + a^2/3) e^{-a},
  // with a = sqrt(2 nu) d / eta
  const double eta = 13.0;
  for (double d : {0.5, 2.0, 7.0, 30.0}) {
    const double a3 = std::sqrt(3.0) * d / eta;
    CHECK(correlation(matern_model(1.5, eta), d) ==
          doctest::Approx((1 + a3) * std::exp(-a3)).epsilon(1e-10));
    const double a5 = std::sqrt(5.0) * d / eta;
    CHECK(correlation(matern_model(2.5, eta), d) ==
          doctest::Approx((1 + a5 + a5 * a5 / 3.0) * std::exp(-a5))
              .epsilon(1e-10));
  }
}

TEST_CASE("matern correlation at zero distance is one") {
  for (double nu : {0.3, 0.74, 1.0, 2.2})
    CHECK(correlation(matern_model(nu, 41.0), 0.0) == 1.0);
}

TEST_CASE("correlation model validation") {
  CHECK_THROWS_AS(correlation(exponential_model(0.0), 1.0), ContractError);
  CHECK_THROWS_AS(correlation(exponential_model(-3.0), 1.0), ContractError);
  CHECK_THROWS_AS(correlation(matern_model(0.0, 10.0), 1.0), ContractError);
  CHECK_THROWS_AS(correlation(matern_model(-1.0, 10.0), 1.0), ContractError);
  CHECK_THROWS_AS(correlation(exponential_model(20.0), -0.5), ContractError);
}

TEST_CASE("family string round trip") {
  CHECK(correlation_family_from_string(to_string(CorrelationFamily::Matern)) ==
        CorrelationFamily::Matern);
  CHECK(correlation_family_from_string(
            to_string(CorrelationFamily::Exponential)) ==
        CorrelationFamily::Exponential);
  CHECK_THROWS_AS(correlation_family_from_string("gamma"), ContractError);
}
