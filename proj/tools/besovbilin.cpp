// besovbilin command-line front end.
//
// Exit codes: 0 success / all checks pass, 1 a check failed, 2 usage or
// config error, 3 numeric failure.

#include <besovbilin.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace bb = besovbilin;
using bb::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct GridOptions {
  std::string preset;
  int dimension = 1;
  std::size_t samples = std::size_t{1} << 14;
  double period = 16.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--grid-preset", preset, "Named grid; \"desk\" is n=1, N=2^14, P=16")
        ->check(CLI::IsMember({"desk"}));
    cmd->add_option("--dimension", dimension, "Spatial dimension n");
    cmd->add_option("--samples", samples, "Samples per axis N (power of two)");
    cmd->add_option("--period-scale", period, "Period scale P; the torus is [-pi P, pi P)^n");
  }

  bb::GridSpec grid() const {
    if (preset == "desk") return bb::GridSpec::desk();
    bb::GridSpec g{dimension, samples, period};
    g.validate();
    return g;
  }
};

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    bb::write_text_file(path, j.dump(2) + "\n");
  }
}

bb::SampledField read_field(const std::string& path) {
  return bb::field_from_json(bb::read_json_file(path), path);
}

bb::EvaluationPath parse_path(const std::string& s) {
  if (s == "automatic") return bb::EvaluationPath::automatic;
  if (s == "bruteforce") return bb::EvaluationPath::bruteforce;
  if (s == "x_independent") return bb::EvaluationPath::x_independent;
  if (s == "separable") return bb::EvaluationPath::separable;
  throw bb::InvalidArgument("--path: unknown path '" + s + "'");
}

// ---------------------------------------------------------------------------

struct NormArgs {
  std::string field;
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  std::optional<int> l_max;
};

int cmd_besov_norm(const NormArgs& a) {
  const bb::SampledField f = read_field(a.field);
  const bb::BesovResult r = bb::besov_norm_detail(f, bb::BesovParams{a.s, a.p, a.q, a.l_max});
  if (!std::isfinite(r.norm)) throw bb::NumericError("norm: non-finite result");
  json bands = json::array();
  for (const auto& b : r.per_band) bands.push_back({{"l", b.level}, {"band_norm", b.band_norm}});
  std::cout << json{{"norm", r.norm}, {"per_band", bands}}.dump(2) << '\n';
  return 0;
}

int cmd_sobolev_norm(const NormArgs& a) {
  const bb::SampledField f = read_field(a.field);
  const double v = bb::sobolev_norm(f, bb::SobolevParams{a.s, a.p});
  if (!std::isfinite(v)) throw bb::NumericError("norm: non-finite result");
  std::cout << json{{"norm", v}}.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ApplyArgs {
  std::string symbol, f1, f2, out;
  std::string path = "automatic";
  bool compare = false;
};

int cmd_apply_op(const ApplyArgs& a) {
  const bb::SampledField f1 = read_field(a.f1);
  const bb::SampledField f2 = read_field(a.f2);
  bb::require_same_grid(f1.grid, f2.grid, "apply-op inputs");
  const bb::Symbol sigma = bb::symbol_from_json(bb::read_json_file(a.symbol), f1.grid, a.symbol);
  const bb::SampledField out = bb::apply_bilinear(sigma, f1, f2, parse_path(a.path));
  bb::require_finite(out.values, "apply-op output");
  if (!a.out.empty()) bb::write_text_file(a.out, bb::field_to_json(out).dump() + "\n");
  if (!a.compare) {
    if (a.out.empty()) std::cout << bb::field_to_json(out).dump() << '\n';
    return 0;
  }
  std::vector<bb::EvaluationPath> paths{bb::EvaluationPath::bruteforce};
  if (!sigma.x_dependent()) paths.push_back(bb::EvaluationPath::x_independent);
  if (sigma.separable()) paths.push_back(bb::EvaluationPath::separable);
  const bb::SampledField ref = bb::apply_bilinear(sigma, f1, f2, paths.front());
  double deviation = 0.0;
  json names = json::array({bb::to_string(paths.front())});
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const bb::SampledField other = bb::apply_bilinear(sigma, f1, f2, paths[i]);
    deviation = std::max(deviation, bb::max_relative_error(other.values, ref.values));
    names.push_back(bb::to_string(paths[i]));
  }
  std::cout << json{{"paths", names}, {"max_relative_deviation", deviation}}.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct MakeSymbolArgs {
  GridOptions grid;
  std::string family = "def-symbol";
  int k_min = 5, k_max = 8;
  double m1 = -0.25, m2 = -0.25;
  int terms = 3;
  double band = 8.0;
  std::size_t box = 16;
  double x_band = 4.0;
  std::uint64_t seed = 1;
  bool descriptor = false;
  std::string out;
};

int cmd_make_symbol(const MakeSymbolArgs& a) {
  const bb::GridSpec grid = a.grid.grid();
  const auto boxes = [&] { return bb::LatticeBox::centered(grid, a.box); };
  json j;
  if (a.family == "random-separable") {
    j = bb::symbol_to_json(bb::Symbol(bb::make_random_separable(a.terms, a.band, a.seed)));
  } else if (a.family == "random-xindep") {
    j = bb::symbol_to_json(bb::Symbol(bb::make_random_xindep_symbol(grid, boxes(), boxes(), a.seed)));
  } else if (a.family == "random-general") {
    j = bb::symbol_to_json(bb::Symbol(bb::make_random_general_symbol(grid, boxes(), boxes(), a.x_band, a.seed)));
  } else {
    bb::SymbolDescriptor d;
    d.family = bb::family_from_string(a.family, "--family");
    d.k_min = a.k_min;
    d.k_max = a.k_max;
    d.m1 = a.m1;
    d.m2 = a.m2;
    const bb::Symbol sigma = d.build(grid);  // validates the band range on this grid
    j = a.descriptor ? bb::descriptor_to_json(d) : bb::symbol_to_json(sigma);
  }
  emit(j, a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct MakeFunctionArgs {
  GridOptions grid;
  std::string kind = "low-bump";
  int j = 6;
  int sign = 1;
  double band = 16.0;
  double frequency = 64.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_make_function(const MakeFunctionArgs& a) {
  const bb::GridSpec grid = a.grid.grid();
  bb::SampledField f = bb::SampledField::zeros(grid);
  if (a.kind == "low-bump") {
    f = bb::make_low_bump(grid);
  } else if (a.kind == "modulated-bump") {
    f = bb::make_modulated_bump(grid, a.j, a.sign);
  } else if (a.kind == "random-band-limited") {
    f = bb::make_random_band_limited(grid, a.band, a.seed);
  } else if (a.kind == "spike") {
    // e^{i x xi_0} along the first axis; xi_0 must sit on the lattice.
    const double m_real = a.frequency * grid.period_scale;
    const long m = std::lround(m_real);
    if (std::abs(m_real - static_cast<double>(m)) > 1e-9 || 2 * std::abs(m) >= static_cast<long>(grid.samples_per_axis))
      throw bb::InvalidArgument("--frequency must be a lattice frequency below Nyquist");
    f = bb::sample_field(grid, [&](std::span<const double> x) { return std::polar(1.0, a.frequency * x[0]); });
  } else if (a.kind != "zero") {
    throw bb::InvalidArgument("--kind: unknown function kind '" + a.kind + "'");
  }
  emit(bb::field_to_json(f), a.out);
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::string suite;
  GridOptions grid;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool plot_data = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  namespace fs = std::filesystem;
  json cfg = a.config.empty() ? json::object() : bb::read_json_file(a.config);
  if (!cfg.is_object()) throw bb::InvalidArgument("config: expected a JSON object");
  if (!a.suite.empty()) cfg["suite"] = a.suite;
  if (!a.grid.preset.empty()) cfg["grid"] = {{"preset", a.grid.preset}};
  if (a.seed) cfg["seed"] = *a.seed;
  if (a.config.empty() && a.suite.empty()) throw bb::InvalidArgument("experiment needs --config or --suite");
  const bb::RunConfig run = bb::run_config_from_json(cfg);
  const fs::path dir = a.out_dir.empty() ? fs::path(run.out_dir) : fs::path(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw bb::InvalidArgument("cannot create output directory '" + dir.string() + "': " + ec.message());
  if (a.plot_data) fs::create_directories(dir / "plot", ec);
  bb::write_text_file((dir / "report.csv").string(), "");

  std::vector<bb::ExperimentReport> reports;
  for (std::size_t i = 0; i < run.experiments.size(); ++i) {
    auto part = bb::run_experiment_entry(run.experiments[i], run.grid, run.seed,
                                         "config.experiments[" + std::to_string(i) + "]");
    for (auto& r : part) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  (" << r.runtime_seconds << " s)\n";
      reports.push_back(std::move(r));
    }
  }
  bool pass = true;
  json jr = json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    jr.push_back(bb::report_to_json(r));
  }
  const json doc = {{"grid", bb::grid_to_json(run.grid)}, {"seed", run.seed}, {"pass", pass}, {"reports", jr}};
  bb::write_text_file((dir / "report.json").string(), doc.dump(2) + "\n");
  bb::write_text_file((dir / "report.csv").string(), bb::reports_to_csv(reports));
  if (a.plot_data)
    for (const auto& r : reports)
      bb::write_text_file((dir / "plot" / (bb::file_stem(r.name) + ".dat")).string(), bb::plot_data(r));
  std::cout << (pass ? "all checks passed" : "some checks failed") << "; reports in " << dir.string() << '\n';
  return pass ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilinear pseudo-differential operators, Besov/Sobolev norms and growth-rate experiments"};
  app.require_subcommand(1);

  NormArgs besov_args;
  auto* besov = app.add_subcommand("besov-norm", "Besov norm of a field file, with per-band norms");
  besov->add_option("--field", besov_args.field, "Field JSON file")->required();
  besov->add_option("--s", besov_args.s, "Smoothness s");
  besov->add_option("--p", besov_args.p, "Integrability p >= 1 (inf allowed)");
  besov->add_option("--q", besov_args.q, "Summability q > 0 (inf allowed)");
  besov->add_option("--l-max", besov_args.l_max, "Band cutoff; defaults to the grid Nyquist band");

  NormArgs sob_args;
  auto* sobolev = app.add_subcommand("sobolev-norm", "Bessel-potential norm of a field file");
  sobolev->add_option("--field", sob_args.field, "Field JSON file")->required();
  sobolev->add_option("--s", sob_args.s, "Smoothness s");
  sobolev->add_option("--p", sob_args.p, "Integrability p >= 1 (inf allowed)");

  ApplyArgs apply_args;
  auto* apply = app.add_subcommand("apply-op", "Evaluate T_sigma(f1, f2)");
  apply->add_option("--symbol", apply_args.symbol, "Symbol JSON file (representation or family descriptor)")->required();
  apply->add_option("--f1", apply_args.f1, "First input field file")->required();
  apply->add_option("--f2", apply_args.f2, "Second input field file")->required();
  apply->add_option("--out", apply_args.out, "Output field file (stdout when omitted)");
  apply->add_option("--path", apply_args.path, "automatic, bruteforce, x_independent or separable");
  apply->add_flag("--compare-paths", apply_args.compare, "Run every applicable path and print the max deviation");

  MakeSymbolArgs sym_args;
  auto* make_symbol = app.add_subcommand("make-symbol", "Write a symbol file");
  sym_args.grid.add(make_symbol);
  make_symbol->add_option("--family", sym_args.family,
                          "def-symbol, product, mixed, identity, random-separable, random-xindep or random-general");
  make_symbol->add_option("--k-min", sym_args.k_min, "Lowest dyadic band of the sharpness families");
  make_symbol->add_option("--k-max", sym_args.k_max, "Highest dyadic band of the sharpness families");
  make_symbol->add_option("--m1", sym_args.m1, "Order m1 (product family)");
  make_symbol->add_option("--m2", sym_args.m2, "Order m2 (product and mixed families)");
  make_symbol->add_option("--terms", sym_args.terms, "Terms of a random separable symbol");
  make_symbol->add_option("--band", sym_args.band, "Frequency band of a random separable symbol");
  make_symbol->add_option("--box", sym_args.box, "Lattice box size per axis of random sampled symbols");
  make_symbol->add_option("--x-band", sym_args.x_band, "x-frequency band of random-general symbols");
  make_symbol->add_option("--seed", sym_args.seed, "Random seed");
  make_symbol->add_flag("--descriptor", sym_args.descriptor, "Write the compact family descriptor instead");
  make_symbol->add_option("--out", sym_args.out, "Output file (stdout when omitted)");

  MakeFunctionArgs fn_args;
  auto* make_function = app.add_subcommand("make-function", "Write a field file");
  fn_args.grid.add(make_function);
  make_function->add_option("--kind", fn_args.kind, "zero, low-bump, modulated-bump, random-band-limited or spike");
  make_function->add_option("--j", fn_args.j, "Dyadic index of a modulated bump");
  make_function->add_option("--sign", fn_args.sign, "-1 centers the bump at -2^j, +1 at +2^j");
  make_function->add_option("--band", fn_args.band, "Band of a random band-limited field");
  make_function->add_option("--frequency", fn_args.frequency, "Frequency of a spike field");
  make_function->add_option("--seed", fn_args.seed, "Random seed");
  make_function->add_option("--out", fn_args.out, "Output file (stdout when omitted)");

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "Run experiments and write JSON/CSV reports");
  experiment->add_option("--config", exp_args.config, "Run-config JSON file");
  experiment->add_option("--suite", exp_args.suite, "Bundled suite: sharpness, lemmas or all");
  experiment->add_option("--grid-preset", exp_args.grid.preset, "Pin the grid to a preset (desk)")
      ->check(CLI::IsMember({"desk"}));
  experiment->add_option("--out-dir", exp_args.out_dir, "Report directory (default: config out_dir or .)");
  experiment->add_option("--seed", exp_args.seed, "Override the config seed");
  experiment->add_flag("--plot-data", exp_args.plot_data, "Also write two-column j/ratio files under plot/");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*besov) return cmd_besov_norm(besov_args);
    if (*sobolev) return cmd_sobolev_norm(sob_args);
    if (*apply) return cmd_apply_op(apply_args);
    if (*make_symbol) return cmd_make_symbol(sym_args);
    if (*make_function) return cmd_make_function(fn_args);
    if (*experiment) return cmd_experiment(exp_args);
  } catch (const bb::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const bb::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}
