#pragma once

#include <string>

#include "latticetopo/core.hpp"

namespace ltopo {

enum class CorrelationFamily { Exponential, Matern };

const char* to_string(CorrelationFamily family);
CorrelationFamily correlation_family_from_string(const std::string& s);

// Isotropic correlation function rho(d).  Exponential: exp(-d/eta).  Matern:
// 2^(1-nu)/Gamma(nu) * (sqrt(2 nu) d / eta)^nu * K_nu(sqrt(2 nu) d / eta),
// which reduces to the exponential at nu = 1/2.
struct CorrelationModel {
  CorrelationFamily family = CorrelationFamily::Exponential;
  double eta = 1.0;  // correlation length
  double nu = 0.5;   // Matern smoothness; fixed 0.5 for Exponential
};

CorrelationModel exponential_model(double eta);
CorrelationModel matern_model(double nu, double eta);

double correlation(const CorrelationModel& model, double dist);

}  // namespace ltopo
