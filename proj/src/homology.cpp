#include "latticetopo/homology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace ltopo {

std::string to_string(FeatureKind kind) {
  return kind == FeatureKind::Component ? "component" : "hole";
}

namespace {

struct UnionFind {
  std::vector<int> parent;

  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }

  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

struct RawPair {
  int birth_idx;  // site whose value births the class
  int death_idx;  // merge site (saddle)
};

// Elder-rule sweep over sites ordered by (value, row-major index).  When
// `with_outside` is set, a virtual node adjacent to every border pixel is
// treated as processed before all sites and eldest; classes that merge into it
// die as usual but its own class is never reported.  Returns dying classes in
// merge order plus, without the outside node, the surviving class via
// `essential_*`.
struct SweepResult {
  std::vector<RawPair> pairs;
  int essential_birth_idx = -1;
  int essential_death_idx = -1;  // site attaining the maximum working value
};

SweepResult elder_sweep(int rows, int cols, const std::vector<double>& value,
                        Neighborhood nbhd, bool with_outside) {
  const int n = rows * cols;
  const int outside = n;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (value[a] != value[b]) return value[a] < value[b];
    return a < b;
  });
  std::vector<int> pos(n);
  for (int p = 0; p < n; ++p) pos[order[p]] = p;

  UnionFind uf(n + 1);
  // birth_pos: sweep position of the class minimum; pos -1 marks the outside
  // class (eldest) and INT_MAX marks "not a class root".
  std::vector<int> birth_pos(n + 1, std::numeric_limits<int>::max());
  std::vector<int> birth_idx(n + 1, -1);
  birth_pos[outside] = -1;

  const auto offsets = neighbor_offsets(nbhd);
  SweepResult result;
  result.pairs.reserve(64);

  int roots[16];
  for (int p = 0; p < n; ++p) {
    const int s = order[p];
    const int r = s / cols, c = s % cols;

    int n_roots = 0;
    auto add_root = [&](int node) {
      const int root = uf.find(node);
      for (int i = 0; i < n_roots; ++i)
        if (roots[i] == root) return;
      roots[n_roots++] = root;
    };
    for (const auto& off : offsets) {
      const int rr = r + off.first, cc = c + off.second;
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      const int nb = rr * cols + cc;
      if (pos[nb] < p) add_root(nb);
    }
    if (with_outside && (r == 0 || r == rows - 1 || c == 0 || c == cols - 1))
      add_root(outside);

    if (n_roots == 0) {
      birth_pos[s] = p;
      birth_idx[s] = s;
      continue;
    }
    int elder = roots[0];
    for (int i = 1; i < n_roots; ++i)
      if (birth_pos[roots[i]] < birth_pos[elder]) elder = roots[i];
    for (int i = 0; i < n_roots; ++i) {
      const int dying = roots[i];
      if (dying == elder) continue;
      result.pairs.push_back({birth_idx[dying], s});
      uf.parent[dying] = elder;
    }
    uf.parent[s] = elder;
  }

  if (!with_outside && n > 0) {
    const int survivor = uf.find(order[0]);
    result.essential_birth_idx = birth_idx[survivor];
    result.essential_death_idx = order[n - 1];
  }
  return result;
}

Site site_of(int idx, int cols) { return {idx / cols, idx % cols}; }

}  // namespace

std::vector<PersistencePair> sublevel_components(const ScalarField& field,
                                                 Neighborhood nbhd) {
  if (field.size() == 0) throw ContractError("sublevel_components: empty field");
  SweepResult sweep =
      elder_sweep(field.rows, field.cols, field.values, nbhd, false);

  std::vector<PersistencePair> out;
  out.reserve(sweep.pairs.size() + 1);
  for (const RawPair& rp : sweep.pairs) {
    PersistencePair pp;
    pp.kind = FeatureKind::Component;
    pp.birth = field.values[rp.birth_idx];
    pp.death = field.values[rp.death_idx];
    pp.birth_site = site_of(rp.birth_idx, field.cols);
    pp.death_site = site_of(rp.death_idx, field.cols);
    out.push_back(pp);
  }
  PersistencePair ess;
  ess.kind = FeatureKind::Component;
  ess.birth = field.values[sweep.essential_birth_idx];
  ess.death = field.values[sweep.essential_death_idx];
  ess.birth_site = site_of(sweep.essential_birth_idx, field.cols);
  ess.death_site = site_of(sweep.essential_death_idx, field.cols);
  ess.essential = true;
  out.push_back(ess);
  return out;
}

std::vector<PersistencePair> sublevel_holes(const ScalarField& field,
                                            Neighborhood nbhd) {
  if (field.size() == 0) throw ContractError("sublevel_holes: empty field");
  std::vector<double> negated(field.values.size());
  for (size_t i = 0; i < negated.size(); ++i) negated[i] = -field.values[i];

  SweepResult sweep = elder_sweep(field.rows, field.cols, negated, nbhd, true);

  // A class of the negated sweep born at a local maximum and dying at a saddle
  // maps to a hole born at that saddle (where the complement region becomes
  // enclosed as t rises) and dying at the maximum (where it fills).
  std::vector<PersistencePair> out;
  out.reserve(sweep.pairs.size());
  for (const RawPair& rp : sweep.pairs) {
    PersistencePair pp;
    pp.kind = FeatureKind::Hole;
    pp.birth = field.values[rp.death_idx];
    pp.death = field.values[rp.birth_idx];
    pp.birth_site = site_of(rp.death_idx, field.cols);
    pp.death_site = site_of(rp.birth_idx, field.cols);
    out.push_back(pp);
  }
  return out;
}

BettiCurve betti_curve(const ScalarField& field, Neighborhood nbhd,
                       const std::vector<double>& levels) {
  if (!std::is_sorted(levels.begin(), levels.end()))
    throw ContractError("betti_curve: levels must be sorted ascending");

  const auto components = sublevel_components(field, nbhd);
  const auto holes = sublevel_holes(field, nbhd);

  // count(t) = #{births <= t} - #{deaths <= t}; the essential component never
  // dies, so its death is omitted from the event lists.
  std::vector<double> c_births, c_deaths, h_births, h_deaths;
  for (const auto& p : components) {
    c_births.push_back(p.birth);
    if (!p.essential) c_deaths.push_back(p.death);
  }
  for (const auto& p : holes) {
    h_births.push_back(p.birth);
    h_deaths.push_back(p.death);
  }
  for (auto* v : {&c_births, &c_deaths, &h_births, &h_deaths})
    std::sort(v->begin(), v->end());

  auto count_le = [](const std::vector<double>& v, double t) {
    return static_cast<int>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
  };

  BettiCurve curve;
  curve.levels = levels;
  curve.beta0.reserve(levels.size());
  curve.beta1.reserve(levels.size());
  for (double t : levels) {
    curve.beta0.push_back(count_le(c_births, t) - count_le(c_deaths, t));
    curve.beta1.push_back(count_le(h_births, t) - count_le(h_deaths, t));
  }
  return curve;
}

int CumulativeCurve::value_at(double t) const {
  const auto it = std::upper_bound(levels.begin(), levels.end(), t);
  if (it == levels.begin()) return 0;
  return counts[it - levels.begin() - 1];
}

CumulativeCurve cumulative_count_curve(const std::vector<PersistencePair>& pairs,
                                       CountBy by) {
  std::vector<double> keys;
  keys.reserve(pairs.size());
  for (const auto& p : pairs) keys.push_back(by == CountBy::Birth ? p.birth : p.death);
  std::sort(keys.begin(), keys.end());

  CumulativeCurve curve;
  size_t i = 0;
  while (i < keys.size()) {
    size_t j = i;
    while (j + 1 < keys.size() && keys[j + 1] == keys[i]) ++j;
    curve.levels.push_back(keys[i]);
    curve.counts.push_back(static_cast<int>(j + 1));
    curve.se_band.push_back(std::sqrt(static_cast<double>(j + 1)));
    i = j + 1;
  }
  return curve;
}

namespace {

template <bool kMaxima>
bool is_strict_extremum(const ScalarField& field, int r, int c,
                        std::span<const std::pair<int, int>> offsets) {
  const double v = field.values[static_cast<size_t>(r) * field.cols + c];
  for (const auto& off : offsets) {
    const int rr = r + off.first, cc = c + off.second;
    if (rr < 0 || rr >= field.rows || cc < 0 || cc >= field.cols) continue;
    const double w = field.values[static_cast<size_t>(rr) * field.cols + cc];
    if (kMaxima ? (v <= w) : (v >= w)) return false;
  }
  return true;
}

}  // namespace

int count_local_extrema(const ScalarField& field, Neighborhood nbhd,
                        ExtremumKind which) {
  const auto offsets = neighbor_offsets(nbhd);
  int count = 0;
  if (which == ExtremumKind::Maxima) {
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (int r = 0; r < field.rows; ++r)
      for (int c = 0; c < field.cols; ++c)
        count += is_strict_extremum<true>(field, r, c, offsets) ? 1 : 0;
  } else {
#pragma omp parallel for reduction(+ : count) schedule(static)
    for (int r = 0; r < field.rows; ++r)
      for (int c = 0; c < field.cols; ++c)
        count += is_strict_extremum<false>(field, r, c, offsets) ? 1 : 0;
  }
  return count;
}

int count_local_extrema_serial(const ScalarField& field, Neighborhood nbhd,
                               ExtremumKind which) {
  const auto offsets = neighbor_offsets(nbhd);
  int count = 0;
  for (int r = 0; r < field.rows; ++r)
    for (int c = 0; c < field.cols; ++c)
      count += (which == ExtremumKind::Maxima
                    ? is_strict_extremum<true>(field, r, c, offsets)
                    : is_strict_extremum<false>(field, r, c, offsets))
                   ? 1
                   : 0;
  return count;
}

void save_pairs_csv(const std::vector<PersistencePair>& pairs,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError(path.string() + ": cannot open for writing");
  out.precision(17);
  out << "kind,birth,death,birth_row,birth_col,death_row,death_col\n";
  for (const auto& p : pairs)
    out << to_string(p.kind) << ',' << p.birth << ',' << p.death << ','
        << p.birth_site.row << ',' << p.birth_site.col << ',' << p.death_site.row
        << ',' << p.death_site.col << '\n';
}

void save_betti_csv(const BettiCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ContractError(path.string() + ": cannot open for writing");
  out.precision(17);
  out << "level,beta0,beta1\n";
  for (size_t i = 0; i < curve.levels.size(); ++i)
    out << curve.levels[i] << ',' << curve.beta0[i] << ',' << curve.beta1[i]
        << '\n';
}

}  // namespace ltopo
