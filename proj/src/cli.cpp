#include "lqwidth/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "lqwidth/csv.hpp"
#include "lqwidth/kreinfeller.hpp"
#include "lqwidth/measure_io.hpp"
#include "lqwidth/parallel.hpp"
#include "lqwidth/partition.hpp"
#include "lqwidth/polyapprox.hpp"
#include "lqwidth/spectrum.hpp"

namespace lqwidth::cli {

namespace {

// Thrown for broken invariants in computed results; maps to exit code 2.
struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

unsigned parse_unsigned(const std::string& s) {
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(s, &used);
  } catch (...) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s[0] == '-') throw std::invalid_argument("not a level: '" + s + "'");
  return static_cast<unsigned>(v);
}

struct Context {
  std::string measure_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  MeasureSpec measure() const {
    if (measure_path.empty()) throw std::invalid_argument("--measure is required");
    return parse_measure_spec(measure_path);
  }

  void emit(const std::string& name, const CsvTable& table) const {
    if (out_dir.empty()) {
      *out << "# " << name << '\n';
      table.write(*out);
      return;
    }
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / name;
    table.write(path);
    *out << "wrote " << path.string() << " (" << table.rows().size() << " rows)\n";
  }
};

const std::vector<std::string> kProjectHeader{"t",     "n_cells",        "dimension", "max_J_a",
                                              "bound", "measured_error", "stderr",    "exact"};

FunctionHandle named_function(const std::string& name) {
  if (name == "sin") {
    return [](std::span<const double> x) {
      double v = 1.0;
      for (double xi : x) v *= std::sin(M_PI * xi);
      return v;
    };
  }
  if (name == "x2") {
    return [](std::span<const double> x) {
      double v = 0.0;
      for (double xi : x) v += xi * xi;
      return v;
    };
  }
  if (name == "sqrt") {
    return [](std::span<const double> x) {
      double v = 0.0;
      for (double xi : x) v += std::sqrt(xi);
      return v;
    };
  }
  if (name == "exp") {
    return [](std::span<const double> x) {
      double v = 0.0;
      for (double xi : x) v += xi;
      return std::exp(v);
    };
  }
  throw std::invalid_argument("unknown function '" + name + "' (sin, x2, sqrt, exp)");
}

std::vector<double> s_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("s grid needs step > 0 and s-max >= s-min");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

void cmd_spectrum(const Context& ctx, const std::string& levels_text, double s_min, double s_max,
                  double s_step) {
  const auto spec = ctx.measure();
  const auto levels = parse_levels(levels_text);
  const auto grid = s_grid(s_min, s_max, s_step);
  auto curves = parallel_map<SpectrumCurve>(levels.size(), [&](std::size_t i) {
    return spectrum_curve(spec, levels[i], grid);
  });
  CsvTable table({"level", "s", "beta_n(s)"});
  for (const auto& c : curves) {
    for (std::size_t k = 0; k < c.s.size(); ++k) table.add(c.level, c.s[k], c.beta[k]);
  }
  ctx.emit("spectrum.csv", table);
}

void cmd_fixedpoint(const Context& ctx, const std::string& levels_text, const std::string& b_text) {
  const auto spec = ctx.measure();
  const auto levels = parse_levels(levels_text);
  const auto bs = parse_reals(b_text);
  CsvTable table({"b", "level", "s_nb", "residual"});
  CsvTable summary({"b", "s_b_hat"});
  for (double b : bs) {
    if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
    const auto fp = s_b_estimate(spec, b, levels);
    for (std::size_t i = 0; i < fp.levels.size(); ++i) table.add(b, fp.levels[i], fp.roots[i], fp.residuals[i]);
    summary.add(b, fp.estimate);
  }
  ctx.emit("fixedpoint.csv", table);
  ctx.emit("fixedpoint_summary.csv", summary);
}

void cmd_partition(const Context& ctx, double a, double t, unsigned max_depth, bool dump) {
  const auto spec = ctx.measure();
  if (!(a > 0.0) || !(t > 0.0)) throw std::invalid_argument("--a and --t must be positive");
  const auto part = adaptive_partition(spec, a, t, max_depth);
  if (auto v = part.check(spec); !v.empty()) throw AssertionFailure("partition check: " + v.front());
  for (const auto& c : part.cells) {
    if (!(c.j < t)) throw AssertionFailure("partition emitted a bad cube " + c.cube.to_string());
  }
  CsvTable summary({"a", "t", "cardinality", "max_J_a", "max_level"});
  summary.add(a, t, part.cardinality(), part.max_j(), part.max_level());
  CsvTable hist({"level", "cells"});
  for (const auto& [lv, n] : part.level_histogram()) hist.add(lv, n);
  ctx.emit("partition_summary.csv", summary);
  ctx.emit("partition_levels.csv", hist);
  if (dump) {
    CsvTable cells({"level", "index", "mass", "J_a"});
    for (const auto& c : part.cells) {
      std::string idx;
      for (auto i : c.cube.indices()) idx += (idx.empty() ? "" : " ") + std::to_string(i);
      cells.add(c.cube.level(), idx, c.mass, c.j);
    }
    ctx.emit("partition_cells.csv", cells);
  }
}

void cmd_entropy(const Context& ctx, const std::string& a_text, double t_start, double t_factor,
                 std::size_t t_count, const std::string& levels_text) {
  const auto spec = ctx.measure();
  const auto as = parse_reals(a_text);
  const auto thresholds = geometric_grid(t_start, t_factor, t_count);
  const auto levels = parse_levels(levels_text);
  const double m = static_cast<double>(dimension(spec));
  CsvTable samples({"a", "t", "card_P_a_t", "max_J_a", "depth"});
  CsvTable fits({"a", "h_a_hat", "stderr", "s_am_hat", "h_le_s_plus_0.05"});
  auto results = parallel_map<EntropyFit>(as.size(), [&](std::size_t i) {
    return entropy_estimate(spec, as[i], thresholds);
  });
  for (const auto& fit : results) {
    for (const auto& s : fit.samples) samples.add(fit.a, s.t, s.cardinality, s.max_j, s.depth);
    const double s_am = s_b_estimate(spec, fit.a * m, levels).estimate;
    fits.add(fit.a, fit.slope(), fit.fit.slope_stderr, s_am, fit.slope() <= s_am + 0.05);
  }
  ctx.emit("entropy.csv", samples);
  ctx.emit("entropy_fit.csv", fits);
}

void cmd_project(const Context& ctx, const OrderParams& params, const std::string& fn, double t_start,
                 double t_factor, std::size_t t_count, std::size_t samples, unsigned width_count) {
  const auto spec = ctx.measure();
  params.validate();
  if (params.m != static_cast<double>(dimension(spec))) throw std::invalid_argument("--m must match the measure dimension");
  if (params.ell != std::floor(params.ell)) throw std::invalid_argument("--ell must be an integer");
  const auto u = named_function(fn);
  const auto ell = static_cast<unsigned>(params.ell);
  const double a = params.rho() / params.m;
  const auto thresholds = geometric_grid(t_start, t_factor, t_count);
  const std::size_t k = kappa(dimension(spec), ell);

  auto rows = parallel_map<std::vector<std::string>>(thresholds.size(), [&](std::size_t i) {
    const auto part = adaptive_partition(spec, a, thresholds[i]);
    const auto approx = piecewise_project(u, part, ell);
    const auto e = error_Lq(u, approx, spec, params.q, samples, ctx.seed + i);
    CsvTable one(kProjectHeader);
    one.add(thresholds[i], part.cardinality(), k * part.cardinality(), part.max_j(),
            std::pow(part.max_j(), 1.0 / params.q), e.value, e.std_error, e.exact);
    return one.rows().front();
  });
  CsvTable errors(kProjectHeader);
  for (auto& r : rows) errors.add_row(std::move(r));
  ctx.emit("project.csv", errors);

  std::vector<std::size_t> cells;
  for (unsigned i = 0; i < width_count; ++i) cells.push_back(std::size_t{1} << i);
  const auto seq = width_upper_sequence(spec, params, cells);
  CsvTable width({"cells", "support_cells", "dimension", "gamma_a", "d_upper_order"});
  for (const auto& p : seq.points) width.add(p.cells, p.support_cells, p.dimension, p.gamma, p.bound);
  ctx.emit("width_upper.csv", width);
  *ctx.out << "width upper slope " << format_number(seq.fit.slope) << " (a = " << format_number(seq.a) << ")\n";
}

void cmd_eigen(const Context& ctx, unsigned level, const std::string& cuts_text, std::size_t x_count,
               bool vectors) {
  const auto spec = ctx.measure();
  const auto atoms = discretize(spec, level);
  const auto eigs = solve_eigen(atoms, vectors);
  if (vectors && eigs.max_residual > kEigenResidualTolerance) {
    throw AssertionFailure("eigen residual " + format_number(eigs.max_residual) + " above tolerance");
  }
  CsvTable table({"n", "lambda_n", "sqrt_lambda"});
  for (std::size_t i = 0; i < eigs.size(); ++i) table.add(i + 1, eigs.eigenvalues[i], std::sqrt(eigs.eigenvalues[i]));
  ctx.emit("eigen.csv", table);
  if (vectors) *ctx.out << "max residual " << format_number(eigs.max_residual) << '\n';

  if (!cuts_text.empty()) {
    const auto cuts = parse_reals(cuts_text);
    if (x_count < 2) throw std::invalid_argument("--x-count must be at least 2");
    // Log-spaced grid from the smallest eigenvalue to just above the largest.
    std::vector<double> xs;
    const double lo = std::log(eigs.eigenvalues.back()) - 0.1;
    const double hi = std::log(eigs.eigenvalues.front()) + 0.1;
    for (std::size_t i = 0; i < x_count; ++i) {
      xs.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(x_count - 1)));
    }
    const auto rep = split_counting_check(atoms, cuts, xs);
    CsvTable sandwich({"x", "N_full", "N_split_sum", "gap"});
    for (const auto& r : rep.rows) sandwich.add(r.x, r.full, r.split_sum, r.gap);
    ctx.emit("sandwich.csv", sandwich);
    if (!rep.ok) throw AssertionFailure("counting sandwich violated");
  }
}

void cmd_order(const Context& ctx, const std::string& levels_text, std::size_t first, std::size_t last) {
  const auto spec = ctx.measure();
  const auto levels = parse_levels(levels_text);
  const auto fit = order_fit(spec, levels, {first, last});
  CsvTable table({"level", "slope", "stderr", "target_slope"});
  for (const auto& lf : fit.levels) table.add(lf.level, lf.fit.slope, lf.fit.slope_stderr, fit.target);
  ctx.emit("order.csv", table);
  *ctx.out << "slope " << format_number(fit.slope) << " drift " << format_number(fit.drift) << " target "
           << format_number(fit.target) << '\n';
}

void cmd_fig1(const Context& ctx, unsigned level) {
  // Sierpinski tetraeder with the figure's weights, 4 corner maps of ratio 1/2.
  const std::vector<double> weights{0.659, 0.28, 0.001, 0.06};
  const std::vector<double> ratios(4, 0.5);
  auto half = [](int k) { return Dyadic{k, 1}; };
  DyadicIFS ifs{3,
                {DyadicMap{1, {half(0), half(0), half(0)}}, DyadicMap{1, {half(1), half(1), half(0)}},
                 DyadicMap{1, {half(1), half(0), half(1)}}, DyadicMap{1, {half(0), half(1), half(1)}}},
                weights};
  const MeasureSpec spec = ifs;
  const double rho = 2.0;
  const double m = 3.0;

  CsvTable curve({"s", "beta(s)", "beta_n(s)", "rho*s", "lebesgue m(1-s)"});
  const LevelSpectrum finite(spec, level);
  for (double s : s_grid(0.0, 1.0, 0.01)) {
    curve.add(s, selfsimilar_beta(weights, ratios, s), finite.beta(s), rho * s, m * (1.0 - s));
  }
  ctx.emit("fig1_curve.csv", curve);

  const double beta0 = selfsimilar_beta(weights, ratios, 0.0);
  const double s_rho = selfsimilar_s_rho(weights, ratios, rho);
  const double s_n = finite.fixed_point(rho).x;
  const double leb = s_nb(Lebesgue{3}, level, rho);
  CsvTable ticks({"quantity", "computed", "figure", "tolerance", "matches_figure"});
  ticks.add("beta(0)", beta0, 2.0, 1e-12, std::abs(beta0 - 2.0) <= 1e-12);
  ticks.add("s_rho", s_rho, 0.425, 0.005, std::abs(s_rho - 0.425) <= 0.005);
  ticks.add("s_n_rho", s_n, 0.425, 0.005, std::abs(s_n - 0.425) <= 0.005);
  ticks.add("m/(m+rho)", m / (m + rho), 0.6, 0.0, m / (m + rho) == 0.6);
  ticks.add("lebesgue s_n_rho", leb, 0.6, 1e-10, std::abs(leb - 0.6) <= 1e-10);
  ctx.emit("fig1_ticks.csv", ticks);
  if (std::abs(s_rho - 0.425) > 0.005) {
    *ctx.err << "note: computed s_rho " << format_number(s_rho)
             << " differs from the figure tick 0.425 by more than 0.005\n";
  }
}

}  // namespace

std::vector<unsigned> parse_levels(std::string_view text) {
  std::vector<unsigned> out;
  std::stringstream ss{std::string(text)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_unsigned(part));
      continue;
    }
    const unsigned lo = parse_unsigned(trim(part.substr(0, dots)));
    const unsigned hi = parse_unsigned(trim(part.substr(dots + 2)));
    if (hi < lo) throw std::invalid_argument("empty level range '" + part + "'");
    for (unsigned v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no levels given");
  return out;
}

std::vector<double> parse_reals(std::string_view text) {
  std::vector<double> out;
  std::stringstream ss{std::string(text)};
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (...) {
      used = 0;
    }
    if (part.empty() || used != part.size() || !std::isfinite(v)) {
      throw std::invalid_argument("not a number: '" + part + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lq-spectra, adaptive dyadic partitions and Krein-Feller spectra of measures", "lqwidth"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  auto common = [&](CLI::App* sub, bool needs_measure) {
    auto* opt = sub->add_option("--measure", ctx.measure_path, "measure spec JSON file");
    if (needs_measure) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", ctx.out_dir, "output directory for CSV files (default: stdout)");
    sub->add_option("--seed", ctx.seed, "seed for stochastic estimates");
    sub->add_option("--workers", ctx.workers, "worker threads (env LQWIDTH_WORKERS)");
  };

  std::string levels = "1..8";
  double s_min = 0.0, s_max = 2.0, s_step = 0.05;
  auto* spectrum = app.add_subcommand("spectrum", "finite-level spectra beta_n(s)");
  common(spectrum, true);
  spectrum->add_option("--levels", levels, "levels, e.g. 4..8");
  spectrum->add_option("--s-min", s_min);
  spectrum->add_option("--s-max", s_max);
  spectrum->add_option("--s-step", s_step);

  std::string b_text = "1";
  auto* fixedpoint = app.add_subcommand("fixedpoint", "fixed points s_{n,b} and the estimate of s_b");
  common(fixedpoint, true);
  fixedpoint->add_option("--levels", levels);
  fixedpoint->add_option("--b", b_text, "comma-separated b values");

  double a = 1.0, t = 0.1;
  unsigned max_depth = kDefaultMaxDepth;
  bool dump = false;
  auto* partition = app.add_subcommand("partition", "adaptive partition P_{a,t}");
  common(partition, true);
  partition->add_option("--a", a);
  partition->add_option("--t", t);
  partition->add_option("--max-depth", max_depth);
  partition->add_flag("--dump", dump, "also write every cell");

  std::string a_text = "0.5,1,2";
  double t_start = 0.5, t_factor = 0.5;
  std::size_t t_count = 16;
  std::string spec_levels = "4..10";
  auto* entropy = app.add_subcommand("entropy", "partition entropy h_a against s_{am}");
  common(entropy, true);
  entropy->add_option("--a", a_text, "comma-separated a values");
  entropy->add_option("--t-start", t_start, "first threshold");
  entropy->add_option("--t-factor", t_factor, "threshold ratio (< 1)");
  entropy->add_option("--t-count", t_count);
  entropy->add_option("--levels", spec_levels, "levels for the s_{am} estimate");

  OrderParams params;
  std::string fn = "sin";
  std::size_t samples = kDefaultMonteCarloSamples;
  unsigned width_count = 10;
  double pt_start = 0.1, pt_factor = 0.5;
  std::size_t pt_count = 6;
  auto* project = app.add_subcommand("project", "piecewise-polynomial approximation errors");
  common(project, true);
  project->add_option("--p", params.p);
  project->add_option("--q", params.q);
  project->add_option("--ell", params.ell);
  project->add_option("--m", params.m);
  project->add_option("--function", fn, "sin, x2, sqrt or exp");
  project->add_option("--t-start", pt_start);
  project->add_option("--t-factor", pt_factor);
  project->add_option("--t-count", pt_count);
  project->add_option("--samples", samples, "Monte Carlo samples");
  project->add_option("--width-count", width_count, "budgets 1, 2, 4, ... for the width bound");

  unsigned level = 8;
  std::string cuts;
  std::size_t x_count = 50;
  bool vectors = false;
  auto* eigen = app.add_subcommand("eigen", "Krein-Feller spectrum and counting sandwich");
  common(eigen, true);
  eigen->add_option("--level", level, "discretization level");
  eigen->add_option("--cuts", cuts, "comma-separated cut points");
  eigen->add_option("--x-count", x_count);
  eigen->add_flag("--vectors", vectors, "compute eigenvectors and residuals");

  std::size_t w_first = 5, w_last = 0;
  std::string order_levels = "8..11";
  auto* order = app.add_subcommand("order", "fitted eigenvalue decay against -1/s_1");
  common(order, true);
  order->add_option("--levels", order_levels, "discretization levels");
  order->add_option("--first", w_first, "first index of the fit window");
  order->add_option("--last", w_last, "last index (0: N/3)");

  unsigned fig_level = 10;
  auto* demo = app.add_subcommand("demo", "reproduce a figure");
  demo->require_subcommand(1);
  auto* fig1 = demo->add_subcommand("fig1", "tetraeder spectrum and its ticks");
  common(fig1, false);
  fig1->add_option("--level", fig_level, "level of the finite-level comparison");

  std::vector<const char*> argv{"lqwidth"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kOk : kParameterError;
  }

  if (ctx.workers > 0) set_default_workers(ctx.workers);
  try {
    if (*spectrum) cmd_spectrum(ctx, levels, s_min, s_max, s_step);
    else if (*fixedpoint) cmd_fixedpoint(ctx, levels, b_text);
    else if (*partition) cmd_partition(ctx, a, t, max_depth, dump);
    else if (*entropy) cmd_entropy(ctx, a_text, t_start, t_factor, t_count, spec_levels);
    else if (*project) cmd_project(ctx, params, fn, pt_start, pt_factor, pt_count, samples, width_count);
    else if (*eigen) cmd_eigen(ctx, level, cuts, x_count, vectors);
    else if (*order) cmd_order(ctx, order_levels, w_first, w_last);
    else if (*fig1) cmd_fig1(ctx, fig_level);
  } catch (const AssertionFailure& e) {
    err << "assertion failed: " << e.what() << '\n';
    set_default_workers(0);
    return kAssertionFailure;
  } catch (const MeasureParseError& e) {
    err << "error: " << e.what() << '\n';
    set_default_workers(0);
    return kParameterError;
  } catch (const InvalidMeasure& e) {
    err << "error: " << e.what() << '\n';
    set_default_workers(0);
    return kParameterError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    set_default_workers(0);
    return kParameterError;
  } catch (const std::exception& e) {
    // Anything else is an internal check that tripped.
    err << "assertion failed: " << e.what() << '\n';
    set_default_workers(0);
    return kAssertionFailure;
  }
  set_default_workers(0);
  return kOk;
}

}  // namespace lqwidth::cli
