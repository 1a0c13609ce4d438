#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latticetopo/correlation.hpp"
#include "latticetopo/core.hpp"

namespace ltopo {

enum class ModelId { Gauss, ChiSq1, ChiSq3, T3, F33 };

const char* to_string(ModelId id);
ModelId model_id_from_string(const std::string& s);

// One of the five benchmark fields: a Gaussian base plus four constructions
// from squared/ratio combinations of independent underlying GRFs, all mapped
// back to exact N(0,1) margins.
struct ModelSpec {
  ModelId id = ModelId::Gauss;
  CorrelationModel underlying;  // correlation of each underlying GRF
  int n_underlying = 1;
};

// Shipped defaults: underlying (nu, eta) calibrated so the transformed field
// approximately matches the Gauss model's exponential correlation (length 20).
ModelSpec default_model(ModelId id);

struct GrfDiagnostics {
  int torus_dim = 0;
  bool clipped = false;      // embedding spectrum had negative eigenvalues
  double min_eigenvalue = 0; // most negative eigenvalue relative to the max
};

// Stationary zero-mean unit-variance GRF by circulant embedding on an enlarged
// torus (padding >= 4 eta, 5-smooth size).  Negative embedding eigenvalues are
// clipped and the variance re-standardized, reported via diagnostics.
ScalarField simulate_grf(int dim, const CorrelationModel& model, uint64_t seed,
                         GrfDiagnostics* diag = nullptr);

// Oracle path: dense Cholesky factorization of the full lattice covariance.
// Exact for any model but O(dim^6); intended for small-dim validation.
ScalarField simulate_grf_dense(int dim, const CorrelationModel& model,
                               uint64_t seed);

// Simulates the model: n_underlying independent GRFs (seeds derived from one
// user seed), the model's combining formula, then the exact marginal map
// Phi^-1(F_dist(z*)) evaluated tail-safely.
ScalarField simulate_model(int dim, const ModelSpec& spec, uint64_t seed);

struct MatchOptions {
  int replicates = 10;
  int dim = 128;
  uint64_t seed = 2024;
  std::vector<double> lags{1, 2, 3, 5, 10, 25, 50};
};

// Offline calibration utility: picks the (nu, eta) grid point whose transformed
// field best matches the target exponential correlation at the probe lags
// (least squares over mean empirical correlations).  Runtime defaults come from
// default_model, not from this search.
std::pair<double, double> match_parameters(
    const CorrelationModel& target, ModelId id,
    const std::vector<std::pair<double, double>>& grid,
    const MatchOptions& opts = {});

}  // namespace ltopo
