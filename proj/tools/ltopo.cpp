// lattice field topology toolkit: simulate, analyze, compare, gof, expected,
// bottleneck.  Exit codes: 0 success, 2 input/contract error, 3 numerical
// failure; errors are emitted as JSON on stderr.  All randomness flows from
// --seed; sub-streams are derived with the library's splitmix-based
// derive_seed hashing.
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "latticetopo/correlation.hpp"
#include "latticetopo/core.hpp"
#include "latticetopo/diagram.hpp"
#include "latticetopo/field_models.hpp"
#include "latticetopo/gaussian.hpp"
#include "latticetopo/grid_io.hpp"
#include "latticetopo/homology.hpp"
#include "latticetopo/inference.hpp"
#include "latticetopo/preprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit_error(const char* category, const std::string& message) {
  json j;
  j["error"]["category"] = category;
  j["error"]["message"] = message;
  std::cerr << j.dump() << std::endl;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ltopo::ContractError("cannot write " + path.string());
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit_result(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text << std::endl;
  else
    write_text(out_path, text);
}

// --- minimal self-contained SVG plots (scatter and step line) ---

struct SvgFrame {
  double x0, x1, y0, y1;               // data window
  static constexpr int w = 640, h = 480, m = 50;

  double px(double x) const { return m + (x - x0) / (x1 - x0) * (w - 2 * m); }
  double py(double y) const { return h - m - (y - y0) / (y1 - y0) * (h - 2 * m); }
};

std::string svg_header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n"
         "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
}

std::string svg_axes(const SvgFrame& fr, const std::string& title) {
  std::ostringstream s;
  s.precision(6);
  s << "<line x1=\"" << fr.m << "\" y1=\"" << fr.h - fr.m << "\" x2=\""
    << fr.w - fr.m << "\" y2=\"" << fr.h - fr.m
    << "\" stroke=\"black\"/>\n<line x1=\"" << fr.m << "\" y1=\"" << fr.m
    << "\" x2=\"" << fr.m << "\" y2=\"" << fr.h - fr.m
    << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << fr.w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  s << "<text x=\"" << fr.m << "\" y=\"" << fr.h - fr.m + 28
    << "\" font-family=\"sans-serif\" font-size=\"11\">" << fr.x0
    << "</text>\n<text x=\"" << fr.w - fr.m << "\" y=\"" << fr.h - fr.m + 28
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
    << fr.x1 << "</text>\n";
  s << "<text x=\"" << fr.m - 6 << "\" y=\"" << fr.h - fr.m
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
    << fr.y0 << "</text>\n<text x=\"" << fr.m - 6 << "\" y=\"" << fr.m + 4
    << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
    << fr.y1 << "</text>\n";
  return s.str();
}

void svg_diagram(const ltopo::PersistenceDiagram& d, const std::string& title,
                 const fs::path& path) {
  double lo = 0, hi = 1;
  if (!d.points.empty()) {
    lo = hi = d.points.front().birth;
    for (const auto& p : d.points) {
      lo = std::min({lo, p.birth, p.death});
      hi = std::max({hi, p.birth, p.death});
    }
    if (hi == lo) hi = lo + 1;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  SvgFrame fr{lo, hi, lo, hi};
  std::ostringstream s;
  s.precision(6);
  s << svg_header() << svg_axes(fr, title);
  s << "<line x1=\"" << fr.px(lo) << "\" y1=\"" << fr.py(lo) << "\" x2=\""
    << fr.px(hi) << "\" y2=\"" << fr.py(hi)
    << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& p : d.points)
    s << "<circle cx=\"" << fr.px(p.birth) << "\" cy=\"" << fr.py(p.death)
      << "\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  s << "</svg>\n";
  write_text(path, s.str());
}

void svg_steps(const std::vector<double>& x, const std::vector<int>& b0,
               const std::vector<int>& b1, const std::string& title,
               const fs::path& path) {
  if (x.empty()) return;
  double ylo = 0, yhi = 1;
  for (size_t i = 0; i < x.size(); ++i)
    yhi = std::max({yhi, static_cast<double>(b0[i]), static_cast<double>(b1[i])});
  SvgFrame fr{x.front(), x.back() > x.front() ? x.back() : x.front() + 1, ylo,
              yhi};
  std::ostringstream s;
  s.precision(6);
  s << svg_header() << svg_axes(fr, title);
  const auto polyline = [&](const std::vector<int>& y, const char* color) {
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (size_t i = 0; i < x.size(); ++i) {
      if (i) s << fr.px(x[i]) << "," << fr.py(y[i - 1]) << " ";
      s << fr.px(x[i]) << "," << fr.py(y[i]) << " ";
    }
    s << "\"/>\n";
  };
  polyline(b0, "steelblue");
  polyline(b1, "firebrick");
  s << "<text x=\"560\" y=\"40\" fill=\"steelblue\" font-family=\"sans-serif\" "
       "font-size=\"12\">b0</text>\n<text x=\"560\" y=\"56\" fill=\"firebrick\" "
       "font-family=\"sans-serif\" font-size=\"12\">b1</text>\n</svg>\n";
  write_text(path, s.str());
}

json peel_json(const std::optional<ltopo::PeelSummary>& p) {
  if (!p) return nullptr;
  json j;
  j["centroid_birth"] = p->centroid_birth;
  j["centroid_death"] = p->centroid_death;
  j["perimeter"] = p->perimeter;
  j["area"] = p->area;
  j["filamentarity"] = p->filamentarity;
  j["retained_points"] = p->retained_points;
  return j;
}

void save_cumulative_csv(const ltopo::CumulativeCurve& c, const fs::path& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ltopo::ContractError("cannot write " + path.string());
  f.precision(17);
  f << "level,count,se\n";
  for (size_t i = 0; i < c.levels.size(); ++i)
    f << c.levels[i] << ',' << c.counts[i] << ',' << c.se_band[i] << "\n";
}

// --- subcommand configs ---

struct SimulateCfg {
  std::string model = "gauss";
  int dim = 256;
  double eta = -1;  // <0: keep the model default
  double nu = -1;
  uint64_t seed = 1;
  std::string output;
  std::string format = "binary";
};

struct AnalyzeCfg {
  std::string input;
  std::string outdir = ".";
  std::string prefix;
  std::string nbhd = "cross";
  int detrend_degree = 4;
  bool no_detrend = false;
  bool no_gaussianize = false;
  double retain = 0.9;
  int betti_levels = 201;
  bool svg = false;
};

struct CompareCfg {
  std::string field_a, field_b;
  std::string nbhd = "cross";
  double retain = 0.9;
  double alpha = 0.05;
  int subset_size = 64;
  int buffer = 32;
  bool filamentarity_only = false;
  std::string output;
  std::string csv;
};

struct GofCfg {
  std::string input;
  std::string nbhd = "cross";
  int detrend_degree = 4;
  bool no_detrend = false;
  bool no_gaussianize = false;
  double delta0 = 3.0;
  std::string output;
};

struct ExpectedCfg {
  int dim = 64;
  std::string nbhd = "cross";
  double eta = 20.0;
  double nu = -1;  // <0: exponential
  double delta0 = 3.0;
  double accuracy = 1e-6;
  bool expected_only = false;
  std::string output;
};

struct BottleneckCfg {
  std::vector<std::string> diagrams;
  std::string kind = "all";
  bool sum = false;
  std::string output;
};

int cmd_simulate(const SimulateCfg& cfg) {
  ltopo::ModelSpec spec = ltopo::default_model(ltopo::model_id_from_string(cfg.model));
  if (cfg.eta > 0) spec.underlying.eta = cfg.eta;
  if (cfg.nu > 0) {
    spec.underlying.family = ltopo::CorrelationFamily::Matern;
    spec.underlying.nu = cfg.nu;
  }
  if (cfg.output.empty()) throw ltopo::ContractError("simulate: --output is required");

  ltopo::GrfDiagnostics diag;
  ltopo::ScalarField field;
  if (spec.id == ltopo::ModelId::Gauss)
    field = ltopo::simulate_grf(cfg.dim, spec.underlying, cfg.seed, &diag);
  else {
    field = ltopo::simulate_model(cfg.dim, spec, cfg.seed);
    ltopo::simulate_grf(cfg.dim, spec.underlying, cfg.seed, &diag);  // diagnostics only
  }
  if (cfg.format == "csv")
    ltopo::save_field_csv(field, cfg.output);
  else if (cfg.format == "binary")
    ltopo::save_field_binary(field, cfg.output);
  else
    throw ltopo::ContractError("simulate: format must be binary or csv");

  json j;
  j["model"] = cfg.model;
  j["family"] = ltopo::to_string(spec.underlying.family);
  j["nu"] = spec.underlying.nu;
  j["eta"] = spec.underlying.eta;
  j["n_underlying"] = spec.n_underlying;
  j["dim"] = cfg.dim;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  j["torus_dim"] = diag.torus_dim;
  j["clipped"] = diag.clipped;
  j["min_eigenvalue"] = diag.min_eigenvalue;
  std::cout << j.dump(2) << std::endl;
  return 0;
}

int cmd_analyze(const AnalyzeCfg& cfg) {
  ltopo::ScalarField field = ltopo::load_field(cfg.input);
  const ltopo::Neighborhood nbhd = ltopo::neighborhood_from_string(cfg.nbhd);
  if (!cfg.no_detrend) field = ltopo::detrend_polynomial(field, cfg.detrend_degree);
  if (!cfg.no_gaussianize) field = ltopo::marginal_gaussianize(field);

  const fs::path outdir = cfg.outdir;
  fs::create_directories(outdir);
  const std::string prefix =
      cfg.prefix.empty() ? fs::path(cfg.input).stem().string() : cfg.prefix;
  const auto out = [&](const std::string& suffix) {
    return outdir / (prefix + suffix);
  };

  const auto comps = ltopo::sublevel_components(field, nbhd);
  const auto holes = ltopo::sublevel_holes(field, nbhd);
  ltopo::save_pairs_csv(comps, out("_components.csv"));
  ltopo::save_pairs_csv(holes, out("_holes.csv"));

  const auto [vmin, vmax] =
      std::minmax_element(field.values.begin(), field.values.end());
  std::vector<double> levels(cfg.betti_levels);
  for (int i = 0; i < cfg.betti_levels; ++i)
    levels[i] = *vmin + (*vmax - *vmin) * i / std::max(1, cfg.betti_levels - 1);
  const ltopo::BettiCurve betti = ltopo::betti_curve(field, nbhd, levels);
  ltopo::save_betti_csv(betti, out("_betti.csv"));

  save_cumulative_csv(ltopo::cumulative_count_curve(comps, ltopo::CountBy::Birth),
                      out("_cumulative_components.csv"));
  save_cumulative_csv(ltopo::cumulative_count_curve(holes, ltopo::CountBy::Birth),
                      out("_cumulative_holes.csv"));

  const ltopo::SummaryBattery battery =
      ltopo::summary_battery(field, nbhd, cfg.retain);
  json j;
  j["input"] = cfg.input;
  j["rows"] = field.rows;
  j["cols"] = field.cols;
  j["neighborhood"] = cfg.nbhd;
  j["detrend_degree"] = cfg.no_detrend ? json(nullptr) : json(cfg.detrend_degree);
  j["gaussianized"] = !cfg.no_gaussianize;
  j["retain_fraction"] = cfg.retain;
  j["n0"] = battery.n0;
  j["n1"] = battery.n1;
  j["components"] = peel_json(battery.components);
  j["holes"] = peel_json(battery.holes);
  write_text(out("_summary.json"), j.dump(2));
  std::cout << j.dump(2) << std::endl;

  if (cfg.svg) {
    svg_diagram(ltopo::diagram_from_pairs(comps, ltopo::FeatureKind::Component),
                prefix + ": components", out("_components.svg"));
    svg_diagram(ltopo::diagram_from_pairs(holes, ltopo::FeatureKind::Hole),
                prefix + ": holes", out("_holes.svg"));
    svg_steps(betti.levels, betti.beta0, betti.beta1, prefix + ": Betti curves",
              out("_betti.svg"));
  }
  return 0;
}

int cmd_compare(const CompareCfg& cfg) {
  const ltopo::ScalarField a = ltopo::load_field(cfg.field_a);
  const ltopo::ScalarField b = ltopo::load_field(cfg.field_b);
  ltopo::CompareOptions opts;
  opts.nbhd = ltopo::neighborhood_from_string(cfg.nbhd);
  opts.retain_fraction = cfg.retain;
  opts.alpha = cfg.alpha;
  opts.subset_size = cfg.subset_size;
  opts.buffer = cfg.buffer;
  opts.filamentarity_only = cfg.filamentarity_only;
  const ltopo::ComparisonReport rep = ltopo::compare_fields(a, b, opts);
  if (!cfg.csv.empty()) ltopo::save_comparison_csv(rep, cfg.csv);
  emit_result(ltopo::comparison_json(rep), cfg.output);
  return 0;
}

int cmd_gof(const GofCfg& cfg) {
  ltopo::ScalarField field = ltopo::load_field(cfg.input);
  if (!cfg.no_detrend) field = ltopo::detrend_polynomial(field, cfg.detrend_degree);
  if (!cfg.no_gaussianize) field = ltopo::marginal_gaussianize(field);
  ltopo::GofOptions opts;
  opts.delta0 = cfg.delta0;
  const ltopo::GofReport rep =
      ltopo::gof_grf(field, ltopo::neighborhood_from_string(cfg.nbhd), opts);
  emit_result(ltopo::gof_json(rep), cfg.output);
  return 0;
}

int cmd_expected(const ExpectedCfg& cfg) {
  const ltopo::CorrelationModel model =
      cfg.nu > 0 ? ltopo::matern_model(cfg.nu, cfg.eta)
                 : ltopo::exponential_model(cfg.eta);
  const ltopo::Neighborhood nbhd = ltopo::neighborhood_from_string(cfg.nbhd);
  json j;
  j["dim"] = cfg.dim;
  j["neighborhood"] = cfg.nbhd;
  j["family"] = ltopo::to_string(model.family);
  j["nu"] = model.nu;
  j["eta"] = model.eta;
  if (cfg.expected_only) {
    const ltopo::ExpectedExtrema e =
        ltopo::expected_extrema(cfg.dim, nbhd, model, cfg.accuracy);
    j["expected"] = e.value;
    j["mvn_error_bound"] = e.mvn_error;
  } else {
    const ltopo::ExtremaMoments mom =
        ltopo::extrema_moments(cfg.dim, nbhd, model, cfg.delta0);
    j["expected"] = mom.expected_count;
    j["variance"] = mom.variance;
    j["sd"] = mom.approx_sd;
    j["delta0"] = mom.delta0;
    j["mvn_error_bound"] = mom.mvn_error_bound;
    j["regularized"] = mom.regularized;
  }
  emit_result(j.dump(2), cfg.output);
  return 0;
}

int cmd_bottleneck(const BottleneckCfg& cfg) {
  if (cfg.diagrams.size() < 2)
    throw ltopo::ContractError("bottleneck: need at least two diagram files");
  std::optional<ltopo::FeatureKind> filter;
  if (cfg.kind == "component")
    filter = ltopo::FeatureKind::Component;
  else if (cfg.kind == "hole")
    filter = ltopo::FeatureKind::Hole;
  else if (cfg.kind != "all")
    throw ltopo::ContractError("bottleneck: kind must be component, hole or all");

  const int n = static_cast<int>(cfg.diagrams.size());
  std::vector<ltopo::PersistenceDiagram> diagrams(n);
  for (int i = 0; i < n; ++i)
    diagrams[i] = ltopo::load_diagram_csv(cfg.diagrams[i], filter);

  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) cells.emplace_back(i, k);
  std::vector<double> dist(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t c = 0; c < cells.size(); ++c) {
    const auto [i, k] = cells[c];
    dist[c] = cfg.sum
                  ? ltopo::wasserstein_sum_distance(diagrams[i], diagrams[k])
                  : ltopo::bottleneck_distance(diagrams[i], diagrams[k]);
  }

  std::ostringstream s;
  s.precision(12);
  s << "file";
  for (const auto& d : cfg.diagrams) s << ',' << d;
  s << '\n';
  std::vector<std::vector<double>> mat(n, std::vector<double>(n, 0.0));
  for (size_t c = 0; c < cells.size(); ++c)
    mat[cells[c].first][cells[c].second] =
        mat[cells[c].second][cells[c].first] = dist[c];
  for (int i = 0; i < n; ++i) {
    s << cfg.diagrams[i];
    for (int k = 0; k < n; ++k) s << ',' << mat[i][k];
    s << '\n';
  }
  emit_result(s.str(), cfg.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice field topology toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker thread cap (falls back to LATTICE_TOPO_THREADS)")
      ->envname("LATTICE_TOPO_THREADS");

  SimulateCfg sim;
  auto* simulate = app.add_subcommand("simulate", "simulate a random field model");
  simulate->add_option("--model", sim.model, "gauss|chisq1|chisq3|t3|f33");
  simulate->add_option("--dim", sim.dim, "lattice dimension")->check(CLI::Range(2, 4096));
  simulate->add_option("--eta", sim.eta, "correlation length override");
  simulate->add_option("--nu", sim.nu, "Matern smoothness override");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("-o,--output", sim.output, "output grid file")->required();
  simulate->add_option("--format", sim.format, "binary|csv");

  AnalyzeCfg ana;
  auto* analyze = app.add_subcommand("analyze", "persistence analysis of one field");
  analyze->add_option("-i,--input", ana.input, "grid file")->required();
  analyze->add_option("-o,--outdir", ana.outdir, "output directory");
  analyze->add_option("--prefix", ana.prefix, "output file prefix");
  analyze->add_option("--neighborhood", ana.nbhd, "cross|square");
  analyze->add_option("--detrend-degree", ana.detrend_degree, "polynomial degree");
  analyze->add_flag("--no-detrend", ana.no_detrend, "skip detrending");
  analyze->add_flag("--no-gaussianize", ana.no_gaussianize, "skip marginal transform");
  analyze->add_option("--retain", ana.retain, "convex peel retain fraction");
  analyze->add_option("--betti-levels", ana.betti_levels, "betti curve grid size")
      ->check(CLI::Range(2, 100000));
  analyze->add_flag("--svg", ana.svg, "also write SVG plots");

  CompareCfg cmp;
  auto* compare = app.add_subcommand("compare", "two-field topological comparison");
  compare->add_option("field_a", cmp.field_a, "first grid file")->required();
  compare->add_option("field_b", cmp.field_b, "second grid file")->required();
  compare->add_option("--neighborhood", cmp.nbhd, "cross|square");
  compare->add_option("--retain", cmp.retain, "convex peel retain fraction");
  compare->add_option("--alpha", cmp.alpha, "test level");
  compare->add_option("--subset-size", cmp.subset_size, "subset side length");
  compare->add_option("--buffer", cmp.buffer, "buffer between subsets");
  compare->add_flag("--filamentarity-only", cmp.filamentarity_only,
                    "single-test variant, no Bonferroni");
  compare->add_option("-o,--output", cmp.output, "report path (default stdout)");
  compare->add_option("--csv", cmp.csv, "per-subset audit CSV path");

  GofCfg gof;
  auto* gofcmd = app.add_subcommand("gof", "goodness of fit against the GRF null");
  gofcmd->add_option("-i,--input", gof.input, "grid file")->required();
  gofcmd->add_option("--neighborhood", gof.nbhd, "cross|square");
  gofcmd->add_option("--detrend-degree", gof.detrend_degree, "polynomial degree");
  gofcmd->add_flag("--no-detrend", gof.no_detrend, "skip detrending");
  gofcmd->add_flag("--no-gaussianize", gof.no_gaussianize, "skip marginal transform");
  gofcmd->add_option("--delta0", gof.delta0, "variance covariance radius");
  gofcmd->add_option("-o,--output", gof.output, "report path (default stdout)");

  ExpectedCfg exp;
  auto* expected = app.add_subcommand("expected", "extrema count moments under the GRF");
  expected->add_option("--dim", exp.dim, "lattice dimension")->required();
  expected->add_option("--neighborhood", exp.nbhd, "cross|square");
  expected->add_option("--eta", exp.eta, "correlation length");
  expected->add_option("--nu", exp.nu, "Matern smoothness (default exponential)");
  expected->add_option("--delta0", exp.delta0, "variance covariance radius");
  expected->add_option("--accuracy", exp.accuracy, "orthant probability accuracy");
  expected->add_flag("--expected-only", exp.expected_only, "skip the variance");
  expected->add_option("-o,--output", exp.output, "report path (default stdout)");

  BottleneckCfg bot;
  auto* bottleneck = app.add_subcommand("bottleneck", "pairwise diagram distances");
  bottleneck->add_option("diagrams", bot.diagrams, "diagram CSV files")->required();
  bottleneck->add_option("--kind", bot.kind, "component|hole|all");
  bottleneck->add_flag("--sum", bot.sum, "sum-of-costs variant");
  bottleneck->add_option("-o,--output", bot.output, "matrix CSV path (default stdout)");

  // let --threads appear after the subcommand name as well
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("contract", e.what());
    return 2;
  }

  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (analyze->parsed()) return cmd_analyze(ana);
    if (compare->parsed()) return cmd_compare(cmp);
    if (gofcmd->parsed()) return cmd_gof(gof);
    if (expected->parsed()) return cmd_expected(exp);
    if (bottleneck->parsed()) return cmd_bottleneck(bot);
  } catch (const ltopo::Error& e) {
    const bool numerical = e.category() == ltopo::ErrorCategory::Numerical;
    emit_error(numerical ? "numerical" : "contract", e.what());
    return numerical ? 3 : 2;
  } catch (const std::exception& e) {
    emit_error("contract", e.what());
    return 2;
  }
  return 0;
}
