#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "latticetopo/correlation.hpp"
#include "latticetopo/core.hpp"
#include "latticetopo/diagram.hpp"

namespace ltopo {

// Two-sided rank-sum p-value.  Exact by dynamic programming over the observed
// mid-ranks when n + m <= 20 (ties enumerate permutations of the tied ranks);
// otherwise normal approximation with tie correction and 0.5 continuity shift.
double wilcoxon_rank_sum(const std::vector<double>& x,
                         const std::vector<double>& y);

struct CompareOptions {
  Neighborhood nbhd = Neighborhood::Cross;
  double retain_fraction = 0.9;
  double alpha = 0.05;
  int subset_size = 64;
  int buffer = 32;
  // Single-test variant: decision from filamentarity alone, no Bonferroni.
  bool filamentarity_only = false;
};

struct ComparisonReport {
  double p_count = 1;
  double p_filamentarity = 1;
  double p_count_adjusted = 1;
  double p_filamentarity_adjusted = 1;
  bool reject = false;
  double alpha = 0.05;
  int subsets_per_field = 0;
  bool canonical_split = false;  // nine 64x64 subsets with 32-pixel buffers
  bool filamentarity_only = false;
  // per-subset statistics, row-major subset order; filamentarity is NaN where
  // the peeled hull degenerated
  std::vector<double> counts_a, counts_b;
  std::vector<double> filamentarity_a, filamentarity_b;
};

// Splits both fields into matching subset grids, computes per-subset component
// counts and hole-diagram filamentarity, and runs two rank-sum tests with a
// Bonferroni factor of 2.  Requires >= subsets-2 valid filamentarity values
// per field (7 of 9 in the canonical layout).
ComparisonReport compare_fields(const ScalarField& a, const ScalarField& b,
                                const CompareOptions& opts = {});

struct GofReport {
  int64_t observed_components = 0;  // local minima (component births)
  int64_t observed_holes = 0;       // local maxima (hole deaths)
  CorrelationModel fitted_model;    // free-shape Matern fit, reported as-is
  double expected = 0;  // gaussian-theory extrema count at the field's dim
  double sd = 0;
  double z_components = 0;
  double z_holes = 0;
  double marginal_mean = 0;  // flags inadequate caller-side preprocessing
  double marginal_sd = 1;
  bool marginal_ok = true;
};

struct GofOptions {
  double delta0 = 3.0;
  double max_fit_lag = 50.0;
  int min_fit_lag = 1;
  // Lag window for the short-range exponential fit that drives expected/sd.
  double moment_fit_lag = 5.0;
};

// Goodness of fit against the GRF null.  Fits a Matern correlation to the
// field's empirical correlation (WLS over lags up to max_fit_lag, weights =
// pair counts) and reports it; evaluates the expected extrema count and its
// SD at the field's dimension and reports z = (observed - expected)/sd for
// both feature kinds.  The moments come from an exponential-shape fit to the
// correlation classes within moment_fit_lag: the expected count is set by the
// correlation at the neighborhood offsets, where the free-shape fit is too
// noisy on a single realization to calibrate (its smoothness estimate moves
// the expectation by far more than the count SD).  The field must be square,
// detrended and marginally Gaussianized by the caller.
GofReport gof_grf(const ScalarField& field, Neighborhood nbhd,
                  const GofOptions& opts = {});

struct SummaryBattery {
  int64_t n0 = 0;  // component count
  int64_t n1 = 0;  // hole count
  std::optional<PeelSummary> components;  // empty when the hull degenerates
  std::optional<PeelSummary> holes;
};

SummaryBattery summary_battery(const ScalarField& field, Neighborhood nbhd,
                               double retain_fraction);

std::string comparison_json(const ComparisonReport& report);
std::string gof_json(const GofReport& report);

// Audit CSV: one row per (field, subset) with count and filamentarity.
void save_comparison_csv(const ComparisonReport& report,
                         const std::filesystem::path& path);

}  // namespace ltopo
