#include "latticetopo/correlation.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

namespace ltopo {

const char* to_string(CorrelationFamily family) {
  return family == CorrelationFamily::Exponential ? "exponential" : "matern";
}

CorrelationFamily correlation_family_from_string(const std::string& s) {
  if (s == "exponential") return CorrelationFamily::Exponential;
  if (s == "matern") return CorrelationFamily::Matern;
  throw ContractError("unknown correlation family: " + s);
}

CorrelationModel exponential_model(double eta) {
  if (eta <= 0) throw ContractError("correlation length eta must be positive");
  return {CorrelationFamily::Exponential, eta, 0.5};
}

CorrelationModel matern_model(double nu, double eta) {
  if (eta <= 0) throw ContractError("correlation length eta must be positive");
  if (nu <= 0) throw ContractError("Matern smoothness nu must be positive");
  return {CorrelationFamily::Matern, eta, nu};
}

double correlation(const CorrelationModel& model, double dist) {
  if (dist < 0) throw ContractError("correlation: distance must be nonnegative");
  if (dist == 0) return 1.0;
  if (model.family == CorrelationFamily::Exponential)
    return std::exp(-dist / model.eta);

  const double arg = std::sqrt(2.0 * model.nu) * dist / model.eta;
  if (arg > 700.0) return 0.0;  // K_nu underflows; avoid 0 * inf at large nu
  const double log_pref =
      (1.0 - model.nu) * std::numbers::ln2 - boost::math::lgamma(model.nu);
  return std::exp(log_pref + model.nu * std::log(arg)) *
         boost::math::cyl_bessel_k(model.nu, arg);
}

}  // namespace ltopo
