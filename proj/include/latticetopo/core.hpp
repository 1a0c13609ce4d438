#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ltopo {

enum class ErrorCategory { Contract, Numerical };

// Base error type; category drives the CLI exit code (2 contract, 3 numerical).
class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, const std::string& msg)
      : std::runtime_error(msg), category_(cat) {}
  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

class ContractError : public Error {
public:
  explicit ContractError(const std::string& msg)
      : Error(ErrorCategory::Contract, msg) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg)
      : Error(ErrorCategory::Numerical, msg) {}
};

// Provenance-only coordinate metadata; no computation depends on it.
struct GridMeta {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double spacing = 1.0;
};

// Rectangular lattice of real values, row-major.
struct ScalarField {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
  std::optional<GridMeta> meta;

  ScalarField() = default;
  ScalarField(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<size_t>(r) * c, fill) {
    if (r <= 0 || c <= 0) throw ContractError("ScalarField dimensions must be positive");
  }

  int size() const noexcept { return rows * cols; }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
  bool in_bounds(int r, int c) const noexcept {
    return r >= 0 && r < rows && c >= 0 && c < cols;
  }
};

enum class Neighborhood { Cross, Square };

// Interior neighbor offsets (dr, dc); boundary sites use the subset that stays in bounds.
std::span<const std::pair<int, int>> neighbor_offsets(Neighborhood nbhd);

const char* to_string(Neighborhood nbhd);
Neighborhood neighborhood_from_string(const std::string& s);

// SplitMix64 stream derivation: one user seed drives all internal streams.
// derive_seed(seed, i) != derive_seed(seed, j) for i != j with overwhelming probability.
uint64_t splitmix64(uint64_t& state);
uint64_t derive_seed(uint64_t seed, uint64_t stream);

// Deterministic normal/uniform generator. Box-Muller on explicit 53-bit
// uniforms so the output stream is identical across platforms and thread counts.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform on (0,1)
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Standard normal CDF and quantile (Wichura's PPND16, |error| < 1e-15).
double norm_cdf(double x);
double norm_quantile(double p);

}  // namespace ltopo
