#include "latticetopo/core.hpp"

#include <array>
#include <cmath>

namespace ltopo {

namespace {
constexpr std::array<std::pair<int, int>, 4> kCross = {
    {{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
constexpr std::array<std::pair<int, int>, 8> kSquare = {
    {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};
}  // namespace

std::span<const std::pair<int, int>> neighbor_offsets(Neighborhood nbhd) {
  if (nbhd == Neighborhood::Cross) return {kCross.data(), kCross.size()};
  return {kSquare.data(), kSquare.size()};
}

const char* to_string(Neighborhood nbhd) {
  return nbhd == Neighborhood::Cross ? "cross" : "square";
}

Neighborhood neighborhood_from_string(const std::string& s) {
  if (s == "cross") return Neighborhood::Cross;
  if (s == "square") return Neighborhood::Square;
  throw ContractError("unknown neighborhood '" + s + "' (expected cross|square)");
}

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t s = seed;
  uint64_t a = splitmix64(s);
  s = a ^ (stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  return splitmix64(s);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {
// coefficients ordered from x^n down to x^0
double horner(std::span<const double> coef, double x) {
  double v = coef[0];
  for (size_t i = 1; i < coef.size(); ++i) v = v * x + coef[i];
  return v;
}
}  // namespace

// Wichura (1988), algorithm AS 241, PPND16.
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw ContractError("norm_quantile: p outside [0,1]");
  }
  static constexpr double A[] = {
      2.5090809287301226727e3, 3.3430575583588128105e4, 6.7265770927008700853e4,
      4.5921953931549871457e4, 1.3731693765509461125e4, 1.9715909503065514427e3,
      1.3314166789178437745e2, 3.3871328727963666080e0};
  static constexpr double B[] = {
      5.2264952788528545610e3, 2.8729085735721942674e4, 3.9307895800092710610e4,
      2.1213794301586595867e4, 5.3941960214247511077e3, 6.8718700749205790830e2,
      4.2313330701600911252e1, 1.0};
  static constexpr double C[] = {
      7.74545014278341407640e-4, 2.27238449892691845833e-2, 2.41780725177450611770e-1,
      1.27045825245236838258e0,  3.64784832476320460504e0,  5.76949722146069140550e0,
      4.63033784615654529590e0,  1.42343711074968357734e0};
  static constexpr double D[] = {
      1.05075007164441684324e-9, 5.47593808499534494600e-4, 1.51986665636164571966e-2,
      1.48103976427480074590e-1, 6.89767334985100004550e-1, 1.67638483018380384940e0,
      2.05319162663775882187e0,  1.0};
  static constexpr double E[] = {
      2.01033439929228813265e-7, 2.71155556874348757815e-5, 1.24266094738807843860e-3,
      2.65321895265761230930e-2, 2.96560571828504891230e-1, 1.78482653991729133580e0,
      5.46378491116411436990e0,  6.65790464350110377720e0};
  static constexpr double F[] = {
      2.04426310338993978564e-15, 1.42151175831644588870e-7, 1.84631831751005468180e-5,
      7.86869131145613259100e-4,  1.48753612908506148525e-2, 1.36929880922735805310e-1,
      5.99832206555887937690e-1,  1.0};

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(A, r) / horner(B, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = horner(C, r) / horner(D, r);
  } else {
    r -= 5.0;
    val = horner(E, r) / horner(F, r);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace ltopo
