#pragma once

#include <filesystem>
#include <vector>

#include "latticetopo/core.hpp"

namespace ltopo {

enum class FeatureKind { Component, Hole };

std::string to_string(FeatureKind kind);

struct Site {
  int row = 0;
  int col = 0;
};

// One feature of the sublevel filtration.  Components are born at local
// minima and die at merge saddles (elder rule); the first-born component is
// `essential` and its death is pinned to the global maximum.  Holes are born
// at saddles and die at the local maxima that fill them.
struct PersistencePair {
  FeatureKind kind = FeatureKind::Component;
  double birth = 0;
  double death = 0;
  Site birth_site;
  Site death_site;
  bool essential = false;
};

// Components of {z <= t} as t sweeps upward.  One pair per sweep-order local
// minimum; ties in field values are broken by row-major site index so the
// filtration is a total order.
std::vector<PersistencePair> sublevel_components(const ScalarField& field,
                                                 Neighborhood nbhd);

// Holes of {z <= t}: connected groups of complement pixels (same neighborhood
// kind) fully enclosed by the level set.  Computed by the component sweep on
// the negated field with a virtual outside node adjacent to every border
// pixel; the outside class is not a hole and is excluded.
std::vector<PersistencePair> sublevel_holes(const ScalarField& field,
                                            Neighborhood nbhd);

struct BettiCurve {
  std::vector<double> levels;
  std::vector<int> beta0;
  std::vector<int> beta1;
};

// Betti numbers of {z <= t} at each requested level (ascending).
// beta0(t) counts component pairs with birth <= t < death plus the essential
// component once t passes its birth; beta1(t) counts hole pairs alive at t.
BettiCurve betti_curve(const ScalarField& field, Neighborhood nbhd,
                       const std::vector<double>& levels);

enum class CountBy { Birth, Death };

// Nondecreasing step function t -> #pairs with birth (or death) <= t, with a
// naive sqrt(count) counting-process band.
struct CumulativeCurve {
  std::vector<double> levels;   // jump locations, strictly increasing
  std::vector<int> counts;      // value attained at each jump
  std::vector<double> se_band;  // sqrt(count) per jump

  int value_at(double t) const;  // 0 below the first jump
};

CumulativeCurve cumulative_count_curve(const std::vector<PersistencePair>& pairs,
                                       CountBy by);

enum class ExtremumKind { Minima, Maxima };

// Sites strictly below (Minima) / above (Maxima) every neighbor; boundary
// sites compare against their reduced neighbor set.  Tied sites never count.
int count_local_extrema(const ScalarField& field, Neighborhood nbhd,
                        ExtremumKind which);
int count_local_extrema_serial(const ScalarField& field, Neighborhood nbhd,
                               ExtremumKind which);

void save_pairs_csv(const std::vector<PersistencePair>& pairs,
                    const std::filesystem::path& path);

void save_betti_csv(const BettiCurve& curve, const std::filesystem::path& path);

}  // namespace ltopo
