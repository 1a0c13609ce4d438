#include "latticetopo/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace ltopo {

PersistenceDiagram diagram_from_pairs(const std::vector<PersistencePair>& pairs,
                                      FeatureKind kind) {
  PersistenceDiagram d;
  d.kind = kind;
  for (const auto& p : pairs)
    if (p.kind == kind) d.points.push_back({p.birth, p.death});
  return d;
}

PersistenceDiagram load_diagram_csv(const std::filesystem::path& path,
                                    std::optional<FeatureKind> filter) {
  std::ifstream in(path);
  if (!in) throw ContractError(path.string() + ": cannot open");
  std::string header;
  if (!std::getline(in, header))
    throw ContractError(path.string() + ": empty file");

  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };

  const auto cols = split(header);
  int birth_col = -1, death_col = -1, kind_col = -1;
  for (size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "birth") birth_col = static_cast<int>(i);
    if (cols[i] == "death") death_col = static_cast<int>(i);
    if (cols[i] == "kind") kind_col = static_cast<int>(i);
  }
  if (birth_col < 0 || death_col < 0)
    throw ContractError(path.string() + ": header must name birth and death columns");

  PersistenceDiagram d;
  if (filter) d.kind = *filter;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) <= std::max(birth_col, death_col))
      throw ContractError(path.string() + ": line " + std::to_string(line_no) +
                          ": too few columns");
    if (filter && kind_col >= 0 && kind_col < static_cast<int>(cells.size()) &&
        cells[kind_col] != to_string(*filter))
      continue;
    DiagramPoint pt;
    try {
      pt.birth = std::stod(cells[birth_col]);
      pt.death = std::stod(cells[death_col]);
    } catch (const std::exception&) {
      throw ContractError(path.string() + ": line " + std::to_string(line_no) +
                          ": non-numeric birth/death");
    }
    if (pt.birth > pt.death)
      throw ContractError(path.string() + ": line " + std::to_string(line_no) +
                          ": birth > death");
    d.points.push_back(pt);
  }
  return d;
}

namespace {

double cross(const DiagramPoint& o, const DiagramPoint& a, const DiagramPoint& b) {
  return (a.birth - o.birth) * (b.death - o.death) -
         (a.death - o.death) * (b.birth - o.birth);
}

// Andrew monotone chain; returns strict hull vertices in CCW order (collinear
// edge-interior points are not vertices).
std::vector<DiagramPoint> convex_hull(std::vector<DiagramPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const int n = static_cast<int>(pts.size());
  if (n <= 2) return pts;

  std::vector<DiagramPoint> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

PeelResult convex_peel(const PersistenceDiagram& diagram, double retain_fraction) {
  if (retain_fraction <= 0.0 || retain_fraction > 1.0)
    throw ContractError("convex_peel: retain_fraction must lie in (0, 1]");
  if (diagram.points.empty())
    throw DegenerateHullError("convex_peel: empty diagram", {});
  const int n0 = static_cast<int>(diagram.points.size());
  const int threshold =
      static_cast<int>(std::ceil(retain_fraction * static_cast<double>(n0)));

  std::vector<DiagramPoint> retained = diagram.points;
  for (;;) {
    const auto hull = convex_hull(retained);
    // every copy of a hull-vertex location is a vertex of the multiset's hull
    std::vector<DiagramPoint> next;
    next.reserve(retained.size());
    for (const auto& p : retained)
      if (std::find(hull.begin(), hull.end(), p) == hull.end()) next.push_back(p);
    if (static_cast<int>(next.size()) < threshold) break;
    retained = std::move(next);
  }

  PeelResult result;
  result.hull = convex_hull(retained);
  result.retained = std::move(retained);
  if (result.hull.size() < 3)
    throw DegenerateHullError(
        "convex_peel: degenerate hull (fewer than 3 distinct retained points)",
        result.retained);
  return result;
}

PeelSummary peel_summary(const PersistenceDiagram& diagram, double retain_fraction,
                         CentroidKind centroid) {
  const PeelResult peel = convex_peel(diagram, retain_fraction);
  const auto& h = peel.hull;
  const int m = static_cast<int>(h.size());

  double area2 = 0, cx = 0, cy = 0, perim = 0;
  for (int i = 0; i < m; ++i) {
    const auto& p = h[i];
    const auto& q = h[(i + 1) % m];
    const double w = p.birth * q.death - q.birth * p.death;
    area2 += w;
    cx += (p.birth + q.birth) * w;
    cy += (p.death + q.death) * w;
    perim += std::hypot(q.birth - p.birth, q.death - p.death);
  }
  if (area2 == 0.0)
    throw DegenerateHullError("peel_summary: retained points are collinear",
                              peel.retained);

  PeelSummary s;
  s.area = 0.5 * std::abs(area2);
  s.perimeter = perim;
  if (centroid == CentroidKind::Polygon) {
    s.centroid_birth = cx / (3.0 * area2);
    s.centroid_death = cy / (3.0 * area2);
  } else {
    double sb = 0, sd = 0;
    for (const auto& p : peel.retained) {
      sb += p.birth;
      sd += p.death;
    }
    s.centroid_birth = sb / static_cast<double>(peel.retained.size());
    s.centroid_death = sd / static_cast<double>(peel.retained.size());
  }
  const double p2 = s.perimeter * s.perimeter;
  const double fourpia = 4.0 * std::numbers::pi * s.area;
  s.filamentarity = (p2 - fourpia) / (p2 + fourpia);
  s.retained_points = static_cast<int>(peel.retained.size());
  return s;
}

namespace {

double linf(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double diag_cost(const DiagramPoint& p) { return 0.5 * (p.death - p.birth); }

// Kuhn augmenting-path search: can every vertex of `required` be matched into
// the adjacency lists, stealing along alternating paths?
bool saturates(const std::vector<std::vector<int>>& adj,
               const std::vector<int>& required, int n_right) {
  std::vector<int> match_right(n_right, -1);
  std::vector<char> visited(n_right);

  auto try_augment = [&](auto&& self, int u) -> bool {
    for (int v : adj[u]) {
      if (visited[v]) continue;
      visited[v] = 1;
      if (match_right[v] < 0 || self(self, match_right[v])) {
        match_right[v] = u;
        return true;
      }
    }
    return false;
  };

  for (int u : required) {
    std::fill(visited.begin(), visited.end(), 0);
    if (!try_augment(try_augment, u)) return false;
  }
  return true;
}

// Feasibility at cost bound lambda: a partial matching of cost <= lambda must
// cover every point farther than lambda from the diagonal, on both sides.
// Saturating each side separately suffices: two one-sided matchings always
// merge into one covering both vertex sets (Mendelsohn-Dulmage).
bool feasible(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
              double lambda) {
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());

  std::vector<std::vector<int>> a_to_b(na), b_to_a(nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (linf(a[i], b[j]) <= lambda) {
        a_to_b[i].push_back(j);
        b_to_a[j].push_back(i);
      }

  std::vector<int> req_a, req_b;
  for (int i = 0; i < na; ++i)
    if (diag_cost(a[i]) > lambda) req_a.push_back(i);
  for (int j = 0; j < nb; ++j)
    if (diag_cost(b[j]) > lambda) req_b.push_back(j);

  return saturates(a_to_b, req_a, nb) && saturates(b_to_a, req_b, na);
}

}  // namespace

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b) {
  const auto& pa = a.points;
  const auto& pb = b.points;

  std::vector<double> candidates{0.0};
  for (const auto& p : pa) candidates.push_back(diag_cost(p));
  for (const auto& q : pb) candidates.push_back(diag_cost(q));
  for (const auto& p : pa)
    for (const auto& q : pb) candidates.push_back(linf(p, q));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  // smallest candidate cost at which the matching is feasible
  size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const size_t mid = lo + (hi - lo) / 2;
    if (feasible(pa, pb, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

namespace {

// O(n^3) Hungarian assignment on a square cost matrix.
double hungarian(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1), way(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double cost = 0;
  for (int j = 1; j <= n; ++j) cost += a[p[j] - 1][j - 1];
  return cost;
}

}  // namespace

double wasserstein_sum_distance(const PersistenceDiagram& a,
                                const PersistenceDiagram& b) {
  const auto& pa = a.points;
  const auto& pb = b.points;
  const int na = static_cast<int>(pa.size());
  const int nb = static_cast<int>(pb.size());
  const int n = na + nb;
  if (n == 0) return 0.0;

  // rows: points of A then diagonal slots for B; columns: points of B then
  // diagonal slots for A; diagonal-to-diagonal costs zero
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) cost[i][j] = linf(pa[i], pb[j]);
    for (int j = nb; j < n; ++j) cost[i][j] = diag_cost(pa[i]);
  }
  for (int i = na; i < n; ++i)
    for (int j = 0; j < nb; ++j) cost[i][j] = diag_cost(pb[j]);
  return hungarian(cost);
}

}  // namespace ltopo
