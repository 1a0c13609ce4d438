#include "latticetopo/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <vector>

#include "json.hpp"
#include "latticetopo/gaussian.hpp"
#include "latticetopo/homology.hpp"
#include "latticetopo/preprocess.hpp"

namespace ltopo {

namespace {

// Doubled mid-ranks of the pooled sample (integers even under ties) plus the
// tie-group sizes for the variance correction.
struct Ranked {
  std::vector<int> x2, y2;
  std::vector<int> tie_sizes;
};

Ranked pooled_midranks(const std::vector<double>& x, const std::vector<double>& y) {
  struct Item {
    double v;
    bool from_x;
  };
  std::vector<Item> all;
  all.reserve(x.size() + y.size());
  for (double v : x) all.push_back({v, true});
  for (double v : y) all.push_back({v, false});
  std::stable_sort(all.begin(), all.end(),
                   [](const Item& a, const Item& b) { return a.v < b.v; });
  Ranked out;
  const size_t n = all.size();
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && all[j].v == all[i].v) ++j;
    const int doubled = static_cast<int>(i + j + 1);  // 2 * mid-rank, 1-based
    for (size_t k = i; k < j; ++k)
      (all[k].from_x ? out.x2 : out.y2).push_back(doubled);
    out.tie_sizes.push_back(static_cast<int>(j - i));
    i = j;
  }
  return out;
}

}  // namespace

double wilcoxon_rank_sum(const std::vector<double>& x,
                         const std::vector<double>& y) {
  if (x.empty() || y.empty())
    throw ContractError("wilcoxon_rank_sum: samples must be nonempty");
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(y.size());
  const int total = n + m;
  const Ranked ranked = pooled_midranks(x, y);

  if (total <= 20) {
    // exact null: sum over all size-n subsets of the observed doubled
    // mid-ranks, two-sided by deviation from the subset-sum mean
    std::vector<int> t = ranked.x2;
    t.insert(t.end(), ranked.y2.begin(), ranked.y2.end());
    int sum_all = 0;
    for (int r : t) sum_all += r;
    std::vector<std::vector<double>> cnt(
        n + 1, std::vector<double>(sum_all + 1, 0.0));
    cnt[0][0] = 1.0;
    for (int r : t)
      for (int j = n - 1; j >= 0; --j)
        for (int s = sum_all - r; s >= 0; --s)
          if (cnt[j][s] != 0.0) cnt[j + 1][s + r] += cnt[j][s];
    int64_t w_obs = 0;
    for (int r : ranked.x2) w_obs += r;
    const int64_t center = static_cast<int64_t>(n) * sum_all;
    const int64_t dev_obs = std::llabs(w_obs * total - center);
    double hits = 0, comb = 0;
    for (int s = 0; s <= sum_all; ++s) {
      if (cnt[n][s] == 0.0) continue;
      comb += cnt[n][s];
      if (std::llabs(static_cast<int64_t>(s) * total - center) >= dev_obs)
        hits += cnt[n][s];
    }
    return hits / comb;
  }

  // normal approximation with tie correction and continuity shift
  double w = 0;
  for (int r : ranked.x2) w += 0.5 * r;
  const double mu = n * (total + 1) / 2.0;
  double tie = 0;
  for (int c : ranked.tie_sizes)
    tie += static_cast<double>(c) * c * c - c;
  const double var =
      n * static_cast<double>(m) / 12.0 *
      (total + 1 - tie / (static_cast<double>(total) * (total - 1)));
  if (var <= 0) return 1.0;
  const double dev = std::max(std::abs(w - mu) - 0.5, 0.0);
  return std::min(1.0, 2.0 * norm_cdf(-dev / std::sqrt(var)));
}

ComparisonReport compare_fields(const ScalarField& a, const ScalarField& b,
                                const CompareOptions& opts) {
  if (!(opts.alpha > 0 && opts.alpha < 1))
    throw ContractError("compare_fields: alpha must lie in (0,1)");
  if (!(opts.retain_fraction > 0 && opts.retain_fraction <= 1))
    throw ContractError("compare_fields: retain_fraction must lie in (0,1]");
  if (opts.subset_size < 2)
    throw ContractError("compare_fields: subset_size must be at least 2");
  const std::vector<ScalarField> subs_a =
      split_subsets(a, opts.subset_size, opts.buffer);
  const std::vector<ScalarField> subs_b =
      split_subsets(b, opts.subset_size, opts.buffer);
  if (subs_a.size() != subs_b.size())
    throw ContractError("compare_fields: fields yield " +
                        std::to_string(subs_a.size()) + " vs " +
                        std::to_string(subs_b.size()) + " subsets");
  const int ns = static_cast<int>(subs_a.size());
  if (ns < 4)
    throw ContractError("compare_fields: need at least 4 subsets per field, got " +
                        std::to_string(ns));

  ComparisonReport rep;
  rep.alpha = opts.alpha;
  rep.subsets_per_field = ns;
  rep.filamentarity_only = opts.filamentarity_only;
  rep.canonical_split = a.rows == 256 && a.cols == 256 && b.rows == 256 &&
                        b.cols == 256 && opts.subset_size == 64 &&
                        opts.buffer == 32;
  rep.counts_a.resize(ns);
  rep.counts_b.resize(ns);
  rep.filamentarity_a.resize(ns);
  rep.filamentarity_b.resize(ns);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < 2 * ns; ++i) {
    const ScalarField& sub = i < ns ? subs_a[i] : subs_b[i - ns];
    const double n0 =
        static_cast<double>(sublevel_components(sub, opts.nbhd).size());
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
      const PersistenceDiagram d =
          diagram_from_pairs(sublevel_holes(sub, opts.nbhd), FeatureKind::Hole);
      f = peel_summary(d, opts.retain_fraction).filamentarity;
    } catch (const ContractError&) {
      // degenerate hull: this subset contributes no filamentarity value
    }
    (i < ns ? rep.counts_a : rep.counts_b)[i % ns] = n0;
    (i < ns ? rep.filamentarity_a : rep.filamentarity_b)[i % ns] = f;
  }

  std::vector<double> fa, fb;
  for (double v : rep.filamentarity_a)
    if (!std::isnan(v)) fa.push_back(v);
  for (double v : rep.filamentarity_b)
    if (!std::isnan(v)) fb.push_back(v);
  const int need = std::max(2, ns - 2);
  if (static_cast<int>(fa.size()) < need || static_cast<int>(fb.size()) < need)
    throw ContractError(
        "compare_fields: too few valid filamentarity values (" +
        std::to_string(fa.size()) + " and " + std::to_string(fb.size()) +
        " of " + std::to_string(ns) + ", need " + std::to_string(need) + ")");

  rep.p_count = wilcoxon_rank_sum(rep.counts_a, rep.counts_b);
  rep.p_filamentarity = wilcoxon_rank_sum(fa, fb);
  if (opts.filamentarity_only) {
    rep.p_count_adjusted = rep.p_count;
    rep.p_filamentarity_adjusted = rep.p_filamentarity;
    rep.reject = rep.p_filamentarity_adjusted < opts.alpha;
  } else {
    rep.p_count_adjusted = std::min(1.0, 2.0 * rep.p_count);
    rep.p_filamentarity_adjusted = std::min(1.0, 2.0 * rep.p_filamentarity);
    rep.reject = std::min(rep.p_count_adjusted, rep.p_filamentarity_adjusted) <
                 opts.alpha;
  }
  return rep;
}

namespace {

// WLS Matern fit by nested grid refinement in (log nu, log eta); the search
// box is fixed and an estimate pinned to its edge is a non-convergence.
CorrelationModel fit_matern_wls(const EmpiricalCorrelation& corr, int min_lag) {
  std::vector<double> lag, rho, wt;
  for (size_t i = 0; i < corr.lags.size(); ++i) {
    if (corr.lags[i] < min_lag || corr.counts[i] <= 0) continue;
    lag.push_back(corr.lags[i]);
    rho.push_back(corr.estimates[i]);
    wt.push_back(static_cast<double>(corr.counts[i]));
  }
  if (lag.size() < 3)
    throw ContractError("gof_grf: too few correlation lags to fit");

  const double lnu_lo = std::log(0.05), lnu_hi = std::log(5.0);
  const double leta_lo = std::log(0.5), leta_hi = std::log(200.0);
  const auto sse = [&](double nu, double eta) {
    const CorrelationModel m = matern_model(nu, eta);
    double s = 0;
    for (size_t i = 0; i < lag.size(); ++i) {
      const double d = rho[i] - correlation(m, lag[i]);
      s += wt[i] * d * d;
    }
    return s;
  };

  constexpr int kGrid = 13;
  double lo_n = lnu_lo, hi_n = lnu_hi, lo_e = leta_lo, hi_e = leta_hi;
  double best_n = lo_n, best_e = lo_e;
  double best = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 4; ++round) {
    for (int i = 0; i < kGrid; ++i) {
      const double ln = lo_n + (hi_n - lo_n) * i / (kGrid - 1);
      for (int j = 0; j < kGrid; ++j) {
        const double le = lo_e + (hi_e - lo_e) * j / (kGrid - 1);
        const double s = sse(std::exp(ln), std::exp(le));
        if (s < best) {
          best = s;
          best_n = ln;
          best_e = le;
        }
      }
    }
    const double step_n = (hi_n - lo_n) / (kGrid - 1);
    const double step_e = (hi_e - lo_e) / (kGrid - 1);
    lo_n = std::max(lnu_lo, best_n - step_n);
    hi_n = std::min(lnu_hi, best_n + step_n);
    lo_e = std::max(leta_lo, best_e - step_e);
    hi_e = std::min(leta_hi, best_e + step_e);
  }
  const double eps = 1e-9;
  if (best_n < lnu_lo + eps || best_n > lnu_hi - eps || best_e < leta_lo + eps ||
      best_e > leta_hi - eps)
    throw NumericalError(
        "gof_grf: correlation fit did not converge (estimate at search "
        "boundary)");
  return matern_model(std::exp(best_n), std::exp(best_e));
}

// 1-D WLS of exp(-d/eta) against the correlation classes with 0 < d <=
// max_d, weights = pair counts.  Golden-section search; the loss is unimodal
// in eta for decreasing class estimates, and the window is clamped rather
// than treated as non-convergence because the moments stay finite at both
// ends.
double fit_short_exponential(const EmpiricalCorrelation& emp, double max_d) {
  int used = 0;
  const auto loss = [&](double eta) {
    double s = 0;
    for (size_t i = 0; i < emp.lags.size(); ++i) {
      const double d = emp.lags[i];
      if (d <= 0 || d > max_d || emp.counts[i] <= 0) continue;
      const double r = emp.estimates[i] - std::exp(-d / eta);
      s += static_cast<double>(emp.counts[i]) * r * r;
    }
    return s;
  };
  for (size_t i = 0; i < emp.lags.size(); ++i)
    if (emp.lags[i] > 0 && emp.lags[i] <= max_d && emp.counts[i] > 0) ++used;
  if (used < 2)
    throw ContractError("gof_grf: too few correlation lags within moment_fit_lag");

  double lo = 1.0, hi = 500.0;
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = loss(x1), f2 = loss(x2);
  for (int it = 0; it < 90; ++it) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = loss(x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = loss(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

GofReport gof_grf(const ScalarField& field, Neighborhood nbhd,
                  const GofOptions& opts) {
  if (field.rows != field.cols)
    throw ContractError("gof_grf: field must be square");
  const int dim = field.rows;
  if (dim < 8) throw ContractError("gof_grf: field must be at least 8x8");

  GofReport rep;
  double mean = 0;
  for (double v : field.values) mean += v;
  mean /= field.size();
  double var = 0;
  for (double v : field.values) var += (v - mean) * (v - mean);
  var /= field.size();
  rep.marginal_mean = mean;
  rep.marginal_sd = std::sqrt(var);
  rep.marginal_ok = std::abs(mean) < 0.1 && std::abs(rep.marginal_sd - 1) < 0.1;

  // gaussian-theory predicts extrema counts; boundary-truncated enclosures
  // make the hole-diagram total fall short of the maxima count, so both
  // observations are extrema counts
  rep.observed_components =
      count_local_extrema(field, nbhd, ExtremumKind::Minima);
  rep.observed_holes = count_local_extrema(field, nbhd, ExtremumKind::Maxima);

  if (opts.moment_fit_lag < 1)
    throw ContractError("gof_grf: moment_fit_lag must be >= 1");
  const double max_lag = std::min(opts.max_fit_lag, static_cast<double>(dim - 1));
  const EmpiricalCorrelation emp = empirical_correlation(field, max_lag);
  rep.fitted_model = fit_matern_wls(emp, opts.min_fit_lag);

  const double eta0 =
      fit_short_exponential(emp, std::min(opts.moment_fit_lag, max_lag));
  const ExtremaMoments mom =
      extrema_moments(dim, nbhd, exponential_model(eta0), opts.delta0);
  rep.expected = mom.expected_count;
  rep.sd = mom.approx_sd;
  rep.z_components = (rep.observed_components - rep.expected) / rep.sd;
  rep.z_holes = (rep.observed_holes - rep.expected) / rep.sd;
  return rep;
}

SummaryBattery summary_battery(const ScalarField& field, Neighborhood nbhd,
                               double retain_fraction) {
  SummaryBattery out;
  const std::vector<PersistencePair> comps = sublevel_components(field, nbhd);
  const std::vector<PersistencePair> holes = sublevel_holes(field, nbhd);
  out.n0 = static_cast<int64_t>(comps.size());
  out.n1 = static_cast<int64_t>(holes.size());
  try {
    out.components = peel_summary(
        diagram_from_pairs(comps, FeatureKind::Component), retain_fraction);
  } catch (const DegenerateHullError&) {
  }
  try {
    out.holes = peel_summary(diagram_from_pairs(holes, FeatureKind::Hole),
                             retain_fraction);
  } catch (const DegenerateHullError&) {
  }
  return out;
}

std::string comparison_json(const ComparisonReport& r) {
  nlohmann::json j;
  j["p_count"] = r.p_count;
  j["p_filamentarity"] = r.p_filamentarity;
  j["p_count_adjusted"] = r.p_count_adjusted;
  j["p_filamentarity_adjusted"] = r.p_filamentarity_adjusted;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  j["subsets_per_field"] = r.subsets_per_field;
  j["canonical_split"] = r.canonical_split;
  j["filamentarity_only"] = r.filamentarity_only;
  j["counts_a"] = r.counts_a;
  j["counts_b"] = r.counts_b;
  j["filamentarity_a"] = r.filamentarity_a;
  j["filamentarity_b"] = r.filamentarity_b;
  return j.dump(2);
}

std::string gof_json(const GofReport& r) {
  nlohmann::json j;
  j["observed_components"] = r.observed_components;
  j["observed_holes"] = r.observed_holes;
  j["fitted_model"]["family"] = to_string(r.fitted_model.family);
  j["fitted_model"]["nu"] = r.fitted_model.nu;
  j["fitted_model"]["eta"] = r.fitted_model.eta;
  j["expected"] = r.expected;
  j["sd"] = r.sd;
  j["z_components"] = r.z_components;
  j["z_holes"] = r.z_holes;
  j["marginal_mean"] = r.marginal_mean;
  j["marginal_sd"] = r.marginal_sd;
  j["marginal_ok"] = r.marginal_ok;
  return j.dump(2);
}

void save_comparison_csv(const ComparisonReport& r,
                         const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ContractError("cannot write " + path.string());
  f << "field,subset,count,filamentarity\n";
  f.precision(12);
  for (int i = 0; i < r.subsets_per_field; ++i)
    f << "a," << i << ',' << r.counts_a[i] << ',' << r.filamentarity_a[i] << "\n";
  for (int i = 0; i < r.subsets_per_field; ++i)
    f << "b," << i << ',' << r.counts_b[i] << ',' << r.filamentarity_b[i] << "\n";
  if (!f) throw ContractError("write failed: " + path.string());
}

}  // namespace ltopo
