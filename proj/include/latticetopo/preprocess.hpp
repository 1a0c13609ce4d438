#pragma once

#include <filesystem>
#include <vector>

#include "latticetopo/core.hpp"

namespace ltopo {

// Isotropic correlation estimate: one product-moment correlation per exact
// pair distance (distances grouped by integer squared distance, so integer
// lags carry only pairs at exactly that separation).
struct EmpiricalCorrelation {
  std::vector<double> lags;       // strictly increasing, lags[0] == 0
  std::vector<double> estimates;  // estimates[0] == 1 exactly
  std::vector<int64_t> counts;    // pixel pairs contributing per lag
};

// Least-squares removal of the tensor-product polynomial surface
// {x^i y^j : 0 <= i,j <= degree} with coordinates rescaled to [-1,1] per axis.
// Solved by column-pivoted QR; rank deficiency is reported, not regularized.
ScalarField detrend_polynomial(const ScalarField& field, int degree);

// Normal-scores transform: value -> Phi^-1((rank - 0.5)/n), mid-ranks for ties.
ScalarField marginal_gaussianize(const ScalarField& field);

EmpiricalCorrelation empirical_correlation(const ScalarField& field, double max_lag);
// Reference path: plain double loop over site pairs, no displacement grouping.
EmpiricalCorrelation empirical_correlation_serial(const ScalarField& field,
                                                  double max_lag);

void save_correlation_csv(const EmpiricalCorrelation& corr,
                          const std::filesystem::path& path);

// g x g tiling of subset_size squares separated by `buffer` pixels, anchored at
// the top-left corner; g = floor((dim + buffer)/(subset_size + buffer)) per axis.
std::vector<ScalarField> split_subsets(const ScalarField& field, int subset_size,
                                       int buffer);

}  // namespace ltopo
