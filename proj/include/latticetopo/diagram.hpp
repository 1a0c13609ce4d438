#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "latticetopo/homology.hpp"

namespace ltopo {

struct DiagramPoint {
  double birth = 0;
  double death = 0;

  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

// Multiset of (birth, death) points for one feature kind.
struct PersistenceDiagram {
  std::vector<DiagramPoint> points;
  FeatureKind kind = FeatureKind::Component;
};

PersistenceDiagram diagram_from_pairs(const std::vector<PersistencePair>& pairs,
                                      FeatureKind kind);

// Reads the persistence-pair CSV; only birth/death columns are required.  If a
// kind column is present and `filter` is set, other kinds are dropped.
PersistenceDiagram load_diagram_csv(const std::filesystem::path& path,
                                    std::optional<FeatureKind> filter = {});

// Degenerate-hull failure carrying the set that remained after peeling.
class DegenerateHullError : public ContractError {
public:
  DegenerateHullError(const std::string& msg, std::vector<DiagramPoint> retained)
      : ContractError(msg), retained_(std::move(retained)) {}
  const std::vector<DiagramPoint>& retained() const noexcept { return retained_; }

private:
  std::vector<DiagramPoint> retained_;
};

struct PeelResult {
  std::vector<DiagramPoint> hull;      // counter-clockwise vertex polygon
  std::vector<DiagramPoint> retained;  // points surviving the peeling
};

// Barnett convex peeling: repeatedly strip every vertex of the current hull
// while the post-peel count stays >= ceil(retain_fraction * original count);
// returns the hull of the final set together with that set.
PeelResult convex_peel(const PersistenceDiagram& diagram, double retain_fraction);

enum class CentroidKind { Polygon, PointMean };

struct PeelSummary {
  double centroid_birth = 0;   // C_b
  double centroid_death = 0;   // C_d
  double perimeter = 0;        // P
  double area = 0;             // A
  double filamentarity = 0;    // F = (P^2 - 4 pi A) / (P^2 + 4 pi A)
  int retained_points = 0;
};

PeelSummary peel_summary(const PersistenceDiagram& diagram, double retain_fraction,
                         CentroidKind centroid = CentroidKind::Polygon);

// Standard bottleneck distance: min over partial matchings (diagonal
// projections allowed) of the maximum L-infinity pair cost; exact via binary
// search over candidate costs with bipartite saturation matching.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b);

// Sum-of-costs variant of the same transport problem (1-Wasserstein with
// L-infinity ground metric), solved as an assignment problem.
double wasserstein_sum_distance(const PersistenceDiagram& a,
                                const PersistenceDiagram& b);

}  // namespace ltopo
