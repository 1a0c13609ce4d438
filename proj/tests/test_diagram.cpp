#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "latticetopo/diagram.hpp"
#include "test_util.hpp"

using namespace ltopo;

namespace {

double diag_cost(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

double pair_cost(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

// exhaustive matching oracle: every point of A goes to an unused point of B
// or to the diagonal; leftover B points go to the diagonal
void enumerate_matchings(const std::vector<DiagramPoint>& a,
                         const std::vector<DiagramPoint>& b, size_t i,
                         std::vector<bool>& used, double max_so_far,
                         double sum_so_far, double& best_max,
                         double& best_sum) {
  if (i == a.size()) {
    double mx = max_so_far, sm = sum_so_far;
    for (size_t j = 0; j < b.size(); ++j)
      if (!used[j]) {
        mx = std::max(mx, diag_cost(b[j]));
        sm += diag_cost(b[j]);
      }
    best_max = std::min(best_max, mx);
    best_sum = std::min(best_sum, sm);
    return;
  }
  enumerate_matchings(a, b, i + 1, used, std::max(max_so_far, diag_cost(a[i])),
                      sum_so_far + diag_cost(a[i]), best_max, best_sum);
  for (size_t j = 0; j < b.size(); ++j) {
    if (used[j]) continue;
    used[j] = true;
    enumerate_matchings(a, b, i + 1, used,
                        std::max(max_so_far, pair_cost(a[i], b[j])),
                        sum_so_far + pair_cost(a[i], b[j]), best_max, best_sum);
    used[j] = false;
  }
}

std::pair<double, double> oracle_distances(const PersistenceDiagram& a,
                                           const PersistenceDiagram& b) {
  double best_max = std::numeric_limits<double>::infinity();
  double best_sum = best_max;
  std::vector<bool> used(b.points.size(), false);
  enumerate_matchings(a.points, b.points, 0, used, 0.0, 0.0, best_max,
                      best_sum);
  return {best_max, best_sum};
}

PersistenceDiagram random_diagram(int n, uint64_t seed) {
  PersistenceDiagram d;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double b = 4.0 * rng.uniform();
    d.points.push_back({b, b + 3.0 * rng.uniform()});
  }
  return d;
}

}  // namespace

TEST_CASE("distance pinned examples") {
  PersistenceDiagram a, b, empty;
  a.points = {{0, 2}};
  CHECK(bottleneck_distance(a, empty) == 1.0);  // diagonal projection
  CHECK(wasserstein_sum_distance(a, empty) == 1.0);
  b.points = {{0, 3}};
  CHECK(bottleneck_distance(a, b) == 1.0);  // direct match beats via-diagonal
  CHECK(wasserstein_sum_distance(a, b) == 1.0);
  CHECK(bottleneck_distance(a, a) == 0.0);
  CHECK(bottleneck_distance(empty, empty) == 0.0);
  CHECK(wasserstein_sum_distance(empty, empty) == 0.0);
}

TEST_CASE("distances match the exhaustive matching oracle") {
  Rng size_rng(5000);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = static_cast<int>(size_rng.uniform() * 6);   // 0..5
    const int m = static_cast<int>(size_rng.uniform() * 6);
    const auto a = random_diagram(n, 5100 + trial);
    const auto b = random_diagram(m, 5200 + trial);
    const auto [omax, osum] = oracle_distances(a, b);
    CHECK(bottleneck_distance(a, b) == omax);
    CHECK(wasserstein_sum_distance(a, b) ==
          doctest::Approx(osum).epsilon(1e-12));
  }
}

TEST_CASE("distances are metrics on sampled triples") {
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_diagram(3 + trial % 3, 5300 + trial);
    const auto b = random_diagram(2 + trial % 4, 5400 + trial);
    const auto c = random_diagram(1 + trial % 5, 5500 + trial);
    for (auto dist : {bottleneck_distance, wasserstein_sum_distance}) {
      const double ab = dist(a, b), ba = dist(b, a);
      const double ac = dist(a, c), cb = dist(c, b);
      // assignment potentials accumulate in transposed order, so only
      // near-exact symmetry is guaranteed
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(dist(a, a) == 0.0);
      CHECK(ab <= ac + cb + 1e-12);
      CHECK(ab >= 0.0);
    }
  }
}

TEST_CASE("diagram csv round trip with kind filter") {
  testutil::ScopedFile p(testutil::temp_path("diag", ".csv"));
  {
    std::ofstream out(p.path);
    out << "kind,birth,death\ncomponent,0,2\nhole,1,3\ncomponent,0.5,0.75\n";
  }
  const auto comp = load_diagram_csv(p.path, FeatureKind::Component);
  REQUIRE(comp.points.size() == 2);
  CHECK(comp.kind == FeatureKind::Component);
  const auto hole = load_diagram_csv(p.path, FeatureKind::Hole);
  REQUIRE(hole.points.size() == 1);
  CHECK(hole.points[0] == DiagramPoint{1, 3});
  const auto all = load_diagram_csv(p.path);
  CHECK(all.points.size() == 3);

  testutil::ScopedFile bad(testutil::temp_path("diag", ".csv"));
  {
    std::ofstream out(bad.path);
    out << "birth,death\n3,1\n";
  }
  CHECK_THROWS_AS(load_diagram_csv(bad.path), ContractError);
}

TEST_CASE("peel summary of the unit square") {
  PersistenceDiagram d;
  d.points = {{0, 1}, {0, 2}, {1, 1}, {1, 2}};
  const auto s = peel_summary(d, 1.0);
  CHECK(s.retained_points == 4);
  CHECK(s.perimeter == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(s.area == doctest::Approx(1.0).epsilon(1e-12));
  const double f_square = (16.0 - 4.0 * std::numbers::pi) /
                          (16.0 + 4.0 * std::numbers::pi);
  CHECK(s.filamentarity == doctest::Approx(f_square).epsilon(1e-12));
  CHECK(s.centroid_birth == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.centroid_death == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("peel summary of a near-circle is near zero filamentarity") {
  PersistenceDiagram d;
  for (int i = 0; i < 256; ++i) {
    const double t = 2.0 * std::numbers::pi * i / 256;
    d.points.push_back({5.0 + std::cos(t), 8.0 + std::sin(t)});
  }
  const auto s = peel_summary(d, 1.0);
  CHECK(s.filamentarity < 0.001);
  CHECK(s.centroid_birth == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(s.centroid_death == doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("peel threshold arithmetic") {
  // a 10-point diagram cannot lose its hull (>= 3 vertices) at retain 0.9
  const auto d = random_diagram(10, 5600);
  const auto peel = convex_peel(d, 0.9);
  CHECK(peel.retained.size() == 10);
  CHECK(peel.hull.size() >= 3);

  // signed area of the reported hull is positive: counter-clockwise order
  double twice_area = 0;
  for (size_t i = 0; i < peel.hull.size(); ++i) {
    const auto& p = peel.hull[i];
    const auto& q = peel.hull[(i + 1) % peel.hull.size()];
    twice_area += p.birth * q.death - q.birth * p.death;
  }
  CHECK(twice_area > 0.0);

  // deeper peeling keeps at least the requested fraction
  const auto deep = convex_peel(random_diagram(40, 5601), 0.3);
  CHECK(deep.retained.size() >= 12);
  CHECK(deep.retained.size() < 40);
}

TEST_CASE("peel removes a far outlier from a disc cloud") {
  PersistenceDiagram d;
  Rng rng(5700);
  while (d.points.size() < 400) {
    const double x = 2.0 * rng.uniform() - 1.0, y = 2.0 * rng.uniform() - 1.0;
    if (x * x + y * y <= 1.0) d.points.push_back({x, y + 10.0});
  }
  d.points.push_back({50.0, 70.0});
  const auto peel = convex_peel(d, 0.9);
  CHECK(peel.retained.size() >= 360);
  for (const auto& p : peel.retained) CHECK(p.birth < 2.0);
  CHECK(peel_summary(d, 0.9).filamentarity < 0.15);
}

TEST_CASE("peel summary invariances") {
  const auto d = random_diagram(30, 5800);
  const auto base = peel_summary(d, 0.8);

  const auto again = peel_summary(d, 0.8);
  CHECK(base.centroid_birth == again.centroid_birth);  // determinism
  CHECK(base.perimeter == again.perimeter);

  PersistenceDiagram shifted = d;
  for (auto& p : shifted.points) {
    p.birth += 10.0;
    p.death += 7.0;
  }
  const auto t = peel_summary(shifted, 0.8);
  CHECK(t.centroid_birth == doctest::Approx(base.centroid_birth + 10.0));
  CHECK(t.centroid_death == doctest::Approx(base.centroid_death + 7.0));
  CHECK(t.perimeter == doctest::Approx(base.perimeter).epsilon(1e-9));
  CHECK(t.area == doctest::Approx(base.area).epsilon(1e-9));
  CHECK(t.filamentarity == doctest::Approx(base.filamentarity).epsilon(1e-9));
  CHECK(t.retained_points == base.retained_points);

  PersistenceDiagram scaled = d;
  for (auto& p : scaled.points) {
    p.birth *= 3.0;
    p.death *= 3.0;
  }
  const auto sc = peel_summary(scaled, 0.8);
  CHECK(sc.perimeter == doctest::Approx(3.0 * base.perimeter).epsilon(1e-9));
  CHECK(sc.area == doctest::Approx(9.0 * base.area).epsilon(1e-9));
  CHECK(sc.filamentarity ==
        doctest::Approx(base.filamentarity).epsilon(1e-9));
}

TEST_CASE("degenerate hulls raise with the retained set attached") {
  PersistenceDiagram dup;
  for (int i = 0; i < 6; ++i) dup.points.push_back({1.0, 2.0});
  try {
    convex_peel(dup, 0.9);
    FAIL("expected DegenerateHullError");
  } catch (const DegenerateHullError& e) {
    CHECK(e.retained().size() == 6);
  }

  PersistenceDiagram line;
  for (int i = 0; i < 8; ++i)
    line.points.push_back({static_cast<double>(i), static_cast<double>(i) + 1});
  CHECK_THROWS_AS(convex_peel(line, 1.0), DegenerateHullError);

  PersistenceDiagram two;
  two.points = {{0, 1}, {2, 3}};
  CHECK_THROWS_AS(convex_peel(two, 1.0), DegenerateHullError);

  PersistenceDiagram ok = random_diagram(12, 5900);
  CHECK_THROWS_AS(convex_peel(ok, 0.0), ContractError);
  CHECK_THROWS_AS(convex_peel(ok, 1.5), ContractError);
  PersistenceDiagram empty;
  CHECK_THROWS_AS(convex_peel(empty, 0.9), ContractError);
}

TEST_CASE("diagram_from_pairs filters by kind") {
  std::vector<PersistencePair> pairs(3);
  pairs[0].kind = FeatureKind::Component;
  pairs[0].birth = 0;
  pairs[0].death = 2;
  pairs[1].kind = FeatureKind::Hole;
  pairs[1].birth = 1;
  pairs[1].death = 2;
  pairs[2].kind = FeatureKind::Component;
  pairs[2].birth = 1;
  pairs[2].death = 4;
  const auto d = diagram_from_pairs(pairs, FeatureKind::Component);
  CHECK(d.kind == FeatureKind::Component);
  REQUIRE(d.points.size() == 2);
  CHECK(d.points[1] == DiagramPoint{1, 4});
}
