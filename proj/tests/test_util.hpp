#pragma once

#include <filesystem>
#include <string>

#include "latticetopo/core.hpp"

namespace ltopo::testutil {

// unique scratch path; removed by the caller when the test cares
inline std::filesystem::path temp_path(const std::string& stem,
                                       const std::string& ext) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         (stem + "_" + std::to_string(++counter) + ext);
}

inline ScalarField random_field(int rows, int cols, uint64_t seed) {
  ScalarField f(rows, cols);
  Rng rng(seed);
  for (auto& v : f.values) v = rng.normal();
  return f;
}

struct ScopedFile {
  std::filesystem::path path;
  explicit ScopedFile(std::filesystem::path p) : path(std::move(p)) {}
  ~ScopedFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

// estimate at an exact lag value; -2 when the lag has no pair class
template <typename Corr>
double estimate_at(const Corr& corr, double lag) {
  for (size_t i = 0; i < corr.lags.size(); ++i)
    if (corr.lags[i] == lag) return corr.estimates[i];
  return -2.0;
}

}  // namespace ltopo::testutil
