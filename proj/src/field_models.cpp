#include "latticetopo/field_models.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <complex>
#include <mutex>

#include "latticetopo/preprocess.hpp"

namespace ltopo {

const char* to_string(ModelId id) {
  switch (id) {
    case ModelId::Gauss: return "gauss";
    case ModelId::ChiSq1: return "chisq1";
    case ModelId::ChiSq3: return "chisq3";
    case ModelId::T3: return "t3";
    case ModelId::F33: return "f33";
  }
  return "gauss";
}

ModelId model_id_from_string(const std::string& s) {
  if (s == "gauss") return ModelId::Gauss;
  if (s == "chisq1") return ModelId::ChiSq1;
  if (s == "chisq3") return ModelId::ChiSq3;
  if (s == "t3") return ModelId::T3;
  if (s == "f33") return ModelId::F33;
  throw ContractError("unknown model id: " + s);
}

ModelSpec default_model(ModelId id) {
  switch (id) {
    case ModelId::Gauss: return {id, exponential_model(20.0), 1};
    case ModelId::ChiSq1: return {id, matern_model(0.74, 41.0), 1};
    case ModelId::ChiSq3: return {id, matern_model(0.54, 42.0), 3};
    case ModelId::T3: return {id, matern_model(0.58, 22.0), 4};
    case ModelId::F33: return {id, matern_model(0.54, 50.0), 6};
  }
  throw ContractError("unknown model id");
}

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

bool is_5smooth(int m) {
  for (int p : {2, 3, 5})
    while (m % p == 0) m /= p;
  return m == 1;
}

int embedding_size(int dim, const CorrelationModel& model) {
  const int pad = static_cast<int>(std::ceil(4.0 * model.eta));
  int m = std::max(2 * (dim - 1), dim + pad);
  m = std::max(m, 4);
  while (!is_5smooth(m)) ++m;
  return m;
}

constexpr uint64_t kGrfStream = 0x67726633;  // stream tag for GRF noise

}  // namespace

ScalarField simulate_grf(int dim, const CorrelationModel& model, uint64_t seed,
                         GrfDiagnostics* diag) {
  if (dim < 2) throw ContractError("simulate_grf: dim must be >= 2");
  const int m = embedding_size(dim, model);
  const size_t mm = static_cast<size_t>(m) * m;
  if (mm > (static_cast<size_t>(1) << 26))
    throw ContractError("simulate_grf: dim too large for the memory budget");

  // base block of torus covariances (wrap distance per axis)
  std::vector<std::complex<double>> buf(mm);
  for (int i = 0; i < m; ++i) {
    const int di = std::min(i, m - i);
    for (int j = 0; j < m; ++j) {
      const int dj = std::min(j, m - j);
      buf[static_cast<size_t>(i) * m + j] =
          correlation(model, std::hypot(di, dj));
    }
  }

  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fwd = fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()),
                           FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()),
                           FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(fwd);

  double lambda_max = 0, lambda_min = 0, lambda_sum = 0;
  for (const auto& z : buf) {
    lambda_max = std::max(lambda_max, z.real());
    lambda_min = std::min(lambda_min, z.real());
  }
  const bool clipped = lambda_min < -1e-8 * lambda_max;
  std::vector<double> root(mm);
  for (size_t i = 0; i < mm; ++i) {
    const double lambda = std::max(buf[i].real(), 0.0);
    lambda_sum += lambda;
    root[i] = std::sqrt(lambda);
  }
  if (diag) {
    diag->torus_dim = m;
    diag->clipped = clipped;
    diag->min_eigenvalue = lambda_max > 0 ? lambda_min / lambda_max : 0.0;
  }

  // complex white noise scaled by sqrt(eigenvalues); the backward transform
  // of sqrt(Lambda) xi / sqrt(M) has the block covariance in both Re and Im
  Rng rng(derive_seed(seed, kGrfStream));
  for (size_t i = 0; i < mm; ++i)
    buf[i] = std::complex<double>(rng.normal(), rng.normal()) * root[i];
  fftw_execute(bwd);

  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  double scale = 1.0 / std::sqrt(static_cast<double>(mm));
  if (clipped) scale /= std::sqrt(lambda_sum / static_cast<double>(mm));

  ScalarField field(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      field.at(r, c) = buf[static_cast<size_t>(r) * m + c].real() * scale;
  return field;
}

ScalarField simulate_grf_dense(int dim, const CorrelationModel& model,
                               uint64_t seed) {
  if (dim < 2) throw ContractError("simulate_grf_dense: dim must be >= 2");
  const int n = dim * dim;
  if (n > 4096)
    throw ContractError("simulate_grf_dense: dim too large for dense path");

  Eigen::MatrixXd cov(n, n);
  for (int a = 0; a < n; ++a) {
    const int ra = a / dim, ca = a % dim;
    for (int b = a; b < n; ++b) {
      const int rb = b / dim, cb = b % dim;
      const double rho = correlation(model, std::hypot(ra - rb, ca - cb));
      cov(a, b) = cov(b, a) = rho;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("simulate_grf_dense: covariance factorization failed");
  }

  Rng rng(derive_seed(seed, kGrfStream));
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = rng.normal();
  const Eigen::VectorXd z = llt.matrixL() * g;

  ScalarField field(dim, dim);
  for (int i = 0; i < n; ++i) field.values[i] = z(i);
  return field;
}

namespace {

// Phi^-1 applied to a CDF value supplied as both tails, so the composition
// stays accurate when either tail saturates.
double gauss_score(double cdf_lower, double cdf_upper) {
  if (cdf_lower < 0.5)
    return norm_quantile(std::max(cdf_lower, 1e-300));
  return -norm_quantile(std::max(cdf_upper, 1e-300));
}

template <typename Dist>
void marginal_map(std::vector<double>& values, const Dist& dist) {
  for (double& v : values) {
    const double lo = boost::math::cdf(dist, v);
    const double hi = boost::math::cdf(boost::math::complement(dist, v));
    v = gauss_score(lo, hi);
  }
}

}  // namespace

ScalarField simulate_model(int dim, const ModelSpec& spec, uint64_t seed) {
  if (dim < 2) throw ContractError("simulate_model: dim must be >= 2");
  const int n_fields = spec.n_underlying;
  std::vector<ScalarField> z;
  z.reserve(n_fields);
  for (int i = 0; i < n_fields; ++i)
    z.push_back(simulate_grf(dim, spec.underlying, derive_seed(seed, i)));

  ScalarField out(dim, dim);
  const int n = out.size();
  switch (spec.id) {
    case ModelId::Gauss:
      if (n_fields != 1) throw ContractError("gauss model needs 1 field");
      return z[0];
    case ModelId::ChiSq1: {
      if (n_fields != 1) throw ContractError("chisq1 model needs 1 field");
      for (int i = 0; i < n; ++i) {
        const double v = z[0].values[i];
        out.values[i] = v * v;
      }
      marginal_map(out.values, boost::math::chi_squared_distribution<double>(1));
      return out;
    }
    case ModelId::ChiSq3: {
      if (n_fields != 3) throw ContractError("chisq3 model needs 3 fields");
      for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int f = 0; f < 3; ++f) s += z[f].values[i] * z[f].values[i];
        out.values[i] = s;
      }
      marginal_map(out.values, boost::math::chi_squared_distribution<double>(3));
      return out;
    }
    case ModelId::T3: {
      if (n_fields != 4) throw ContractError("t3 model needs 4 fields");
      for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int f = 1; f < 4; ++f) s += z[f].values[i] * z[f].values[i];
        out.values[i] = z[0].values[i] / std::sqrt(s / 3.0);
      }
      marginal_map(out.values, boost::math::students_t_distribution<double>(3));
      return out;
    }
    case ModelId::F33: {
      if (n_fields != 6) throw ContractError("f33 model needs 6 fields");
      for (int i = 0; i < n; ++i) {
        double num = 0, den = 0;
        for (int f = 0; f < 3; ++f) num += z[f].values[i] * z[f].values[i];
        for (int f = 3; f < 6; ++f) den += z[f].values[i] * z[f].values[i];
        out.values[i] = (num / 3.0) / (den / 3.0);
      }
      marginal_map(out.values, boost::math::fisher_f_distribution<double>(3, 3));
      return out;
    }
  }
  throw ContractError("unknown model id");
}

std::pair<double, double> match_parameters(
    const CorrelationModel& target, ModelId id,
    const std::vector<std::pair<double, double>>& grid, const MatchOptions& opts) {
  if (grid.empty()) throw ContractError("match_parameters: empty search grid");
  if (id == ModelId::Gauss)
    return {0.5, target.eta};  // identity transform preserves the correlation

  const double max_lag =
      *std::max_element(opts.lags.begin(), opts.lags.end());

  double best_sse = std::numeric_limits<double>::infinity();
  std::pair<double, double> best = grid.front();
  for (const auto& [nu, eta] : grid) {
    ModelSpec spec{id, matern_model(nu, eta), default_model(id).n_underlying};
    std::vector<double> mean_corr(opts.lags.size(), 0.0);
    for (int rep = 0; rep < opts.replicates; ++rep) {
      const ScalarField f =
          simulate_model(opts.dim, spec, derive_seed(opts.seed, rep));
      const EmpiricalCorrelation corr = empirical_correlation(f, max_lag);
      for (size_t li = 0; li < opts.lags.size(); ++li) {
        const auto it = std::find(corr.lags.begin(), corr.lags.end(),
                                  opts.lags[li]);
        if (it == corr.lags.end()) continue;
        mean_corr[li] += corr.estimates[it - corr.lags.begin()] /
                         static_cast<double>(opts.replicates);
      }
    }
    double sse = 0;
    for (size_t li = 0; li < opts.lags.size(); ++li) {
      const double d = mean_corr[li] - correlation(target, opts.lags[li]);
      sse += d * d;
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = {nu, eta};
    }
  }
  return best;
}

}  // namespace ltopo
