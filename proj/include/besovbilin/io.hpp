#pragma once

// JSON interchange for fields, windows, symbols, run configs and reports, plus
// the CSV / plot-data emitters. Schema violations raise InvalidArgument naming
// the offending key.

#include <besovbilin/experiments.hpp>

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace besovbilin {

using json = nlohmann::json;

namespace io_detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
}

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InvalidArgument(where + ": missing key '" + key + "'");
  return j.at(key);
}

/// Number, or the strings "inf" / "infinity".
inline double number(const json& v, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return kInf;
  }
  throw InvalidArgument(what + ": expected a number or \"inf\"");
}

/// Non-negative JSON integer (signed or unsigned storage).
inline bool is_count(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

inline int integer_or(const json& j, const std::string& key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw InvalidArgument(where + "." + key + ": expected an integer");
  return j.at(key).get<int>();
}

inline std::string string_or(const json& j, const std::string& key, const std::string& fallback,
                             const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw InvalidArgument(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

inline json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

template <class T>
std::vector<T> array_of(const json& v, const std::string& what) {
  if (!v.is_array()) throw InvalidArgument(what + ": expected an array");
  std::vector<T> out;
  for (const auto& e : v) {
    if constexpr (std::is_same_v<T, double>) {
      out.push_back(number(e, what));
    } else {
      if (!e.is_number_integer()) throw InvalidArgument(what + ": expected integers");
      out.push_back(e.get<T>());
    }
  }
  return out;
}

inline std::vector<cplx> complex_values(const json& v, const std::string& what) {
  if (!v.is_array()) throw InvalidArgument(what + ": expected an array of [re, im] pairs");
  std::vector<cplx> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& e = v[i];
    if (e.is_number()) {
      out.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      out.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InvalidArgument(what + "[" + std::to_string(i) + "]: expected [re, im]");
    }
  }
  return out;
}

inline json complex_array(std::span<const cplx> values) {
  json a = json::array();
  for (const auto& v : values) a.push_back({v.real(), v.imag()});
  return a;
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Grid and fields

inline json grid_to_json(const GridSpec& g) {
  return {{"dimension", g.dimension}, {"samples_per_axis", g.samples_per_axis}, {"period_scale", g.period_scale}};
}

/// Reads {"preset": "desk"} or explicit {dimension, samples_per_axis, period_scale}.
inline GridSpec grid_from_json(const json& j, const std::string& where = "grid") {
  io_detail::check_keys(j, {"preset", "dimension", "samples_per_axis", "period_scale"}, where);
  GridSpec g;
  if (j.contains("preset")) {
    if (io_detail::string_or(j, "preset", "", where) != "desk")
      throw InvalidArgument(where + ".preset: only \"desk\" is defined");
  }
  g.dimension = io_detail::integer_or(j, "dimension", g.dimension, where);
  if (j.contains("samples_per_axis")) {
    if (!io_detail::is_count(j.at("samples_per_axis")))
      throw InvalidArgument(where + ".samples_per_axis: expected a positive integer");
    g.samples_per_axis = j.at("samples_per_axis").get<std::size_t>();
  }
  g.period_scale = io_detail::number_or(j, "period_scale", g.period_scale, where);
  g.validate();
  return g;
}

inline json field_to_json(const SampledField& f) {
  json j = grid_to_json(f.grid);
  j["side"] = "space";
  j["values"] = io_detail::complex_array(f.values);
  return j;
}

/// Field file: grid keys, "side" ("space" or "frequency"), "values". Spectral
/// payloads are transformed back to samples.
inline SampledField field_from_json(const json& j, const std::string& where = "field") {
  io_detail::check_keys(j, {"dimension", "samples_per_axis", "period_scale", "side", "values"}, where);
  json grid_part = json::object();
  for (const char* key : {"dimension", "samples_per_axis", "period_scale"})
    grid_part[key] = io_detail::require(j, key, where);
  const GridSpec grid = grid_from_json(grid_part, where);
  auto values = io_detail::complex_values(io_detail::require(j, "values", where), where + ".values");
  if (values.size() != grid.size())
    throw InvalidArgument(where + ".values: has " + std::to_string(values.size()) + " entries, grid needs " +
                          std::to_string(grid.size()));
  const std::string side = io_detail::string_or(j, "side", "space", where);
  if (side == "frequency") {
    SpectralField spec(grid, std::move(values));
    require_finite(spec.values, where + ".values");
    return inverse_transform(spec);
  }
  if (side != "space") throw InvalidArgument(where + ".side: expected \"space\" or \"frequency\"");
  SampledField f(grid, std::move(values));
  require_finite(f.values, where + ".values");
  return f;
}

// ---------------------------------------------------------------------------
// Windows

inline json window_to_json(const ScalarWindow& w) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ScalarWindow::FlatBump>) {
          return {{"kind", "flat_bump"}, {"inner", k.inner}, {"outer", k.outer}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::FlatAnnulus>) {
          return {{"kind", "flat_annulus"}, {"r", k.r}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::DyadicRescale>) {
          return {{"kind", "dyadic_rescale"}, {"base", window_to_json(*k.base)}, {"scale_exponent", k.scale_exponent}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::CubeCell>) {
          return {{"kind", "cube_cell"}, {"center", k.center}, {"scale", k.scale}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::SobolevWeight>) {
          return {{"kind", "sobolev_weight"}, {"s", k.s}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::Analytic>) {
          return {{"kind", "analytic"}, {"tag", k.tag}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::LpBand>) {
          return {{"kind", "lp_band"}, {"level", k.level}};
        } else if constexpr (std::is_same_v<T, ScalarWindow::Shifted>) {
          return {{"kind", "shifted"}, {"base", window_to_json(*k.base)}, {"offset", k.offset}};
        } else {
          json terms = json::array();
          for (const auto& t : k.terms) terms.push_back({{"coefficient", t.coefficient}, {"window", window_to_json(*t.window)}});
          return {{"kind", "combination"}, {"terms", terms}};
        }
      },
      w.kind());
}

inline ScalarWindow window_from_json(const json& j, const std::string& where = "window") {
  if (!j.is_object()) throw InvalidArgument(where + ": expected a window object");
  const std::string kind = io_detail::string_or(j, "kind", "", where);
  using io_detail::check_keys;
  using io_detail::number;
  using io_detail::require;
  if (kind == "flat_bump") {
    check_keys(j, {"kind", "inner", "outer"}, where);
    return ScalarWindow::flat_bump(number(require(j, "inner", where), where + ".inner"),
                                   number(require(j, "outer", where), where + ".outer"));
  }
  if (kind == "flat_annulus") {
    check_keys(j, {"kind", "r"}, where);
    const auto r = io_detail::array_of<double>(require(j, "r", where), where + ".r");
    if (r.size() != 4) throw InvalidArgument(where + ".r: expected 4 radii");
    return ScalarWindow::flat_annulus(r[0], r[1], r[2], r[3]);
  }
  if (kind == "dyadic_rescale") {
    check_keys(j, {"kind", "base", "scale_exponent"}, where);
    return ScalarWindow::dyadic_rescale(window_from_json(require(j, "base", where), where + ".base"),
                                        io_detail::integer_or(j, "scale_exponent", 0, where));
  }
  if (kind == "cube_cell") {
    check_keys(j, {"kind", "center", "scale"}, where);
    return ScalarWindow::cube_cell(io_detail::array_of<double>(require(j, "center", where), where + ".center"),
                                   io_detail::number_or(j, "scale", 1.0, where));
  }
  if (kind == "sobolev_weight") {
    check_keys(j, {"kind", "s"}, where);
    return ScalarWindow::sobolev_weight(number(require(j, "s", where), where + ".s"));
  }
  if (kind == "analytic") {
    check_keys(j, {"kind", "tag"}, where);
    return ScalarWindow::analytic(io_detail::string_or(j, "tag", "", where));
  }
  if (kind == "lp_band") {
    check_keys(j, {"kind", "level"}, where);
    return ScalarWindow::lp_band(io_detail::integer_or(j, "level", 0, where));
  }
  if (kind == "shifted") {
    check_keys(j, {"kind", "base", "offset"}, where);
    return ScalarWindow::shifted(window_from_json(require(j, "base", where), where + ".base"),
                                 io_detail::array_of<double>(require(j, "offset", where), where + ".offset"));
  }
  if (kind == "combination") {
    check_keys(j, {"kind", "terms"}, where);
    const json& terms = require(j, "terms", where);
    if (!terms.is_array()) throw InvalidArgument(where + ".terms: expected an array");
    std::vector<std::pair<double, ScalarWindow>> parts;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string w = where + ".terms[" + std::to_string(i) + "]";
      check_keys(terms[i], {"coefficient", "window"}, w);
      parts.emplace_back(number(require(terms[i], "coefficient", w), w + ".coefficient"),
                         window_from_json(require(terms[i], "window", w), w + ".window"));
    }
    return ScalarWindow::combination(parts);
  }
  throw InvalidArgument(where + ".kind: unknown window kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Symbols

inline SymbolFamily family_from_string(const std::string& s, const std::string& where) {
  if (s == "def-symbol") return SymbolFamily::def_symbol;
  if (s == "product") return SymbolFamily::product;
  if (s == "mixed") return SymbolFamily::mixed;
  if (s == "identity") return SymbolFamily::identity;
  throw InvalidArgument(where + ": unknown symbol family '" + s + "'");
}

inline json descriptor_to_json(const SymbolDescriptor& d) {
  return {{"family", d.name()}, {"k_min", d.k_min}, {"k_max", d.k_max}, {"m1", d.m1}, {"m2", d.m2}};
}

inline SymbolDescriptor descriptor_from_json(const json& j, const SymbolDescriptor& defaults,
                                             const std::string& where = "symbol") {
  io_detail::check_keys(j, {"family", "k_min", "k_max", "m1", "m2"}, where);
  SymbolDescriptor d = defaults;
  d.family = family_from_string(io_detail::string_or(j, "family", d.name(), where), where + ".family");
  d.k_min = io_detail::integer_or(j, "k_min", d.k_min, where);
  d.k_max = io_detail::integer_or(j, "k_max", d.k_max, where);
  d.m1 = io_detail::number_or(j, "m1", d.m1, where);
  d.m2 = io_detail::number_or(j, "m2", d.m2, where);
  return d;
}

inline json box_to_json(const LatticeBox& b) { return {{"lower", b.lower}, {"extent", b.extent}}; }

inline LatticeBox box_from_json(const json& j, const std::string& where) {
  io_detail::check_keys(j, {"lower", "extent"}, where);
  return {io_detail::array_of<long>(io_detail::require(j, "lower", where), where + ".lower"),
          io_detail::array_of<long>(io_detail::require(j, "extent", where), where + ".extent")};
}

inline json symbol_to_json(const Symbol& sigma) {
  const auto& rep = sigma.representation();
  if (const auto* s = std::get_if<SeparableSum>(&rep)) {
    json terms = json::array();
    for (const auto& t : s->terms)
      terms.push_back({{"coefficient", t.coefficient}, {"m1", window_to_json(t.m1)}, {"m2", window_to_json(t.m2)}});
    return {{"representation", "separable_sum"}, {"terms", terms}};
  }
  auto sampled = [](const auto& r, const char* name) {
    return json{{"representation", name},
                {"grid", grid_to_json(r.grid)},
                {"box1", box_to_json(r.box1)},
                {"box2", box_to_json(r.box2)},
                {"values", io_detail::complex_array(r.values)}};
  };
  if (const auto* x = std::get_if<XIndependentSampled>(&rep)) return sampled(*x, "x_independent_sampled");
  return sampled(std::get<GeneralSampled>(rep), "general_sampled");
}

/// Symbol file: {"representation": ...} or a family descriptor {"family": ...}
/// (families are built on `grid`).
inline Symbol symbol_from_json(const json& j, const GridSpec& grid, const std::string& where = "symbol") {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  if (j.contains("family")) {
    SymbolDescriptor defaults;
    defaults.k_min = 5;
    defaults.k_max = std::min(8, max_symbol_band(grid));
    return descriptor_from_json(j, defaults, where).build(grid);
  }
  const std::string rep = io_detail::string_or(j, "representation", "", where);
  if (rep == "separable_sum") {
    io_detail::check_keys(j, {"representation", "terms"}, where);
    const json& terms = io_detail::require(j, "terms", where);
    if (!terms.is_array()) throw InvalidArgument(where + ".terms: expected an array");
    SeparableSum sum;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string w = where + ".terms[" + std::to_string(i) + "]";
      io_detail::check_keys(terms[i], {"coefficient", "m1", "m2"}, w);
      sum.terms.push_back({io_detail::number_or(terms[i], "coefficient", 1.0, w),
                           window_from_json(io_detail::require(terms[i], "m1", w), w + ".m1"),
                           window_from_json(io_detail::require(terms[i], "m2", w), w + ".m2")});
    }
    return Symbol(std::move(sum));
  }
  if (rep == "x_independent_sampled" || rep == "general_sampled") {
    io_detail::check_keys(j, {"representation", "grid", "box1", "box2", "values"}, where);
    const GridSpec g = grid_from_json(io_detail::require(j, "grid", where), where + ".grid");
    const LatticeBox b1 = box_from_json(io_detail::require(j, "box1", where), where + ".box1");
    const LatticeBox b2 = box_from_json(io_detail::require(j, "box2", where), where + ".box2");
    auto values = io_detail::complex_values(io_detail::require(j, "values", where), where + ".values");
    if (rep == "x_independent_sampled") return Symbol(XIndependentSampled{g, b1, b2, std::move(values)});
    return Symbol(GeneralSampled{g, b1, b2, std::move(values)});
  }
  throw InvalidArgument(where + ".representation: expected separable_sum, x_independent_sampled or general_sampled");
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const ExperimentReport& r) {
  json records = json::array();
  for (const auto& rec : r.records)
    records.push_back({{"label", rec.label},
                       {"j", rec.j},
                       {"norm", io_detail::number_to_json(rec.output_norm)},
                       {"input_norms", rec.input_norms},
                       {"ratio", io_detail::number_to_json(rec.ratio)}});
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = io_detail::number_to_json(v);
  json j = {{"name", r.name},       {"pass", r.pass},   {"tolerance", r.tolerance}, {"runtime_seconds", r.runtime_seconds},
            {"seed", r.seed},       {"notes", r.notes}, {"metrics", metrics},       {"records", records}};
  j["slope"] = r.slope ? json(*r.slope) : json(nullptr);
  j["intercept"] = r.intercept ? json(*r.intercept) : json(nullptr);
  j["residual"] = r.residual ? json(*r.residual) : json(nullptr);
  j["expected"] = r.expected ? json(*r.expected) : json(nullptr);
  return j;
}

namespace io_detail {
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}
}  // namespace io_detail

/// Flat CSV, one row per record; runtimes are left out so reruns are byte-identical.
inline std::string reports_to_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "experiment,j,norm,ratio,slope,expected,pass\n";
  for (const auto& r : reports)
    for (const auto& rec : r.records) {
      const std::string name = rec.label.empty() ? r.name : r.name + ":" + rec.label;
      out << io_detail::csv_field(name) << ',' << rec.j << ',' << io_detail::fmt(rec.output_norm) << ','
          << io_detail::fmt(rec.ratio) << ',' << (r.slope ? io_detail::fmt(*r.slope) : "") << ','
          << (r.expected ? io_detail::fmt(*r.expected) : "") << ',' << (r.pass ? "true" : "false") << '\n';
    }
  return out.str();
}

/// Two-column "j ratio" text for one report.
inline std::string plot_data(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# " << r.name << "\n";
  for (const auto& rec : r.records) out << rec.j << ' ' << io_detail::fmt(rec.ratio) << '\n';
  return out.str();
}

/// Filesystem-safe stem of a report name.
inline std::string file_stem(const std::string& name) {
  std::string s;
  for (char c : name) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return s;
}

// ---------------------------------------------------------------------------
// Run configs

inline NormSpec norm_from_json(const json& j, const std::string& where) {
  io_detail::check_keys(j, {"kind", "s", "p", "q"}, where);
  const std::string kind = io_detail::string_or(j, "kind", "besov", where);
  const double s = io_detail::number_or(j, "s", 0.0, where);
  const double p = io_detail::number_or(j, "p", 2.0, where);
  const double q = io_detail::number_or(j, "q", 2.0, where);
  if (kind == "besov") return NormSpec::besov(s, p, q);
  if (kind == "sobolev") {
    if (j.contains("q")) throw InvalidArgument(where + ".q: Sobolev norms take no q");
    return NormSpec::sobolev(s, p);
  }
  throw InvalidArgument(where + ".kind: expected \"besov\" or \"sobolev\"");
}

inline InputFamily input_family_from_string(const std::string& s, const std::string& where) {
  if (s == "low-high") return InputFamily::low_high;
  if (s == "diagonal") return InputFamily::diagonal;
  if (s == "high-low") return InputFamily::high_low;
  if (s == "random") return InputFamily::random;
  throw InvalidArgument(where + ": unknown input family '" + s + "'");
}

/// Default j sweep on a grid: [5, min(8, capacity)].
inline std::pair<int, int> default_j_range(const GridSpec& grid) { return {5, std::min(8, max_symbol_band(grid))}; }

/// Runs one experiment entry {"type": ..., params...}. Symbols default to
/// k in [j_min, j_max], the dyadic range aligned with the sweep.
inline std::vector<ExperimentReport> run_experiment_entry(const json& e, const GridSpec& grid, std::uint64_t seed,
                                                          const std::string& where) {
  if (!e.is_object()) throw InvalidArgument(where + ": expected an experiment object");
  const std::string type = io_detail::string_or(e, "type", "", where);
  using io_detail::check_keys;
  using io_detail::integer_or;
  using io_detail::number_or;
  const auto [jd_min, jd_max] = default_j_range(grid);
  auto symbol_defaults = [&](int j_min, int j_max) {
    SymbolDescriptor d;
    d.k_min = j_min;
    d.k_max = j_max;
    return d;
  };
  if (type == "closed-form") {
    check_keys(e, {"type", "j_min", "j_max", "k_min", "k_max", "mixed_orders", "tolerance", "max_seconds_per_j"}, where);
    ClosedFormOptions o;
    o.j_min = integer_or(e, "j_min", jd_min, where);
    o.j_max = integer_or(e, "j_max", jd_max, where);
    o.k_min = integer_or(e, "k_min", o.j_min, where);
    o.k_max = integer_or(e, "k_max", o.j_max, where);
    if (e.contains("mixed_orders")) o.mixed_orders = io_detail::array_of<double>(e.at("mixed_orders"), where + ".mixed_orders");
    o.tolerance = number_or(e, "tolerance", o.tolerance, where);
    o.max_seconds_per_j = number_or(e, "max_seconds_per_j", o.max_seconds_per_j, where);
    return {run_closed_form_check(grid, o)};
  }
  if (type == "norm-scaling") {
    check_keys(e, {"type", "j_min", "j_max", "norm", "tolerance"}, where);
    const NormSpec norm = e.contains("norm") ? norm_from_json(e.at("norm"), where + ".norm") : NormSpec{};
    return {run_norm_scaling(grid, integer_or(e, "j_min", jd_min, where), integer_or(e, "j_max", jd_max, where), norm,
                             number_or(e, "tolerance", 0.05, where))};
  }
  if (type == "sharpness") {
    check_keys(e, {"type", "name", "symbol", "inputs", "output", "j_min", "j_max", "expected_exponent", "tolerance",
                   "residual_tolerance"},
               where);
    SweepConfig c;
    c.grid = grid;
    c.seed = seed;
    c.name = io_detail::string_or(e, "name", "sharpness", where);
    c.j_min = integer_or(e, "j_min", jd_min, where);
    c.j_max = integer_or(e, "j_max", jd_max, where);
    c.symbol = e.contains("symbol") ? descriptor_from_json(e.at("symbol"), symbol_defaults(c.j_min, c.j_max), where + ".symbol")
                                    : symbol_defaults(c.j_min, c.j_max);
    c.inputs = input_family_from_string(io_detail::string_or(e, "inputs", "low-high", where), where + ".inputs");
    if (e.contains("output")) c.output = norm_from_json(e.at("output"), where + ".output");
    if (e.contains("expected_exponent")) c.expected_exponent = number_or(e, "expected_exponent", 0.0, where);
    c.tolerance = number_or(e, "tolerance", c.tolerance, where);
    c.residual_tolerance = number_or(e, "residual_tolerance", c.residual_tolerance, where);
    return {run_sharpness_sweep(c)};
  }
  if (type == "boundedness") {
    check_keys(e, {"type", "name", "symbol", "s1", "s2", "p1", "p2", "q1", "q2", "s", "p", "q", "families", "j_min",
                   "j_max", "max_spread", "min_growth"},
               where);
    BoundednessConfig c;
    c.grid = grid;
    c.seed = seed;
    c.name = io_detail::string_or(e, "name", "boundedness", where);
    c.j_min = integer_or(e, "j_min", jd_min, where);
    c.j_max = integer_or(e, "j_max", jd_max, where);
    c.symbol = e.contains("symbol") ? descriptor_from_json(e.at("symbol"), symbol_defaults(c.j_min, c.j_max), where + ".symbol")
                                    : symbol_defaults(c.j_min, c.j_max);
    c.s1 = number_or(e, "s1", c.s1, where);
    c.s2 = number_or(e, "s2", c.s2, where);
    c.p1 = number_or(e, "p1", c.p1, where);
    c.p2 = number_or(e, "p2", c.p2, where);
    c.q1 = number_or(e, "q1", c.q1, where);
    c.q2 = number_or(e, "q2", c.q2, where);
    c.s = number_or(e, "s", c.s1 + c.s2, where);
    c.p = number_or(e, "p", c.p, where);
    c.q = number_or(e, "q", c.q, where);
    if (e.contains("families")) {
      const json& fams = e.at("families");
      if (!fams.is_array()) throw InvalidArgument(where + ".families: expected an array");
      c.families.clear();
      for (const auto& f : fams) {
        if (!f.is_string()) throw InvalidArgument(where + ".families: expected strings");
        c.families.push_back(input_family_from_string(f.get<std::string>(), where + ".families"));
      }
    }
    c.max_spread = number_or(e, "max_spread", c.max_spread, where);
    c.min_growth = number_or(e, "min_growth", c.min_growth, where);
    return {run_boundedness_probe(c)};
  }
  if (type == "lemmas") {
    check_keys(e, {"type", "radii", "square_band", "lattice_band", "lattice_sizes", "band_min", "band_max"}, where);
    LemmaOptions o;
    o.grid = grid;
    o.seed = seed;
    if (e.contains("radii")) o.radii = io_detail::array_of<double>(e.at("radii"), where + ".radii");
    o.square_band = number_or(e, "square_band", o.square_band, where);
    o.lattice_band = integer_or(e, "lattice_band", o.lattice_band, where);
    if (e.contains("lattice_sizes")) o.lattice_sizes = io_detail::array_of<int>(e.at("lattice_sizes"), where + ".lattice_sizes");
    o.band_min = integer_or(e, "band_min", o.band_min, where);
    o.band_max = integer_or(e, "band_max", o.band_max, where);
    return run_lemma_checks(o);
  }
  if (type == "path-agreement") {
    check_keys(e, {"type", "instances", "samples_per_axis", "period_scale", "tolerance"}, where);
    GridSpec small{grid.dimension, 64, 2.0};
    if (e.contains("samples_per_axis")) small.samples_per_axis = static_cast<std::size_t>(integer_or(e, "samples_per_axis", 64, where));
    small.period_scale = number_or(e, "period_scale", small.period_scale, where);
    small.validate();
    return {run_path_agreement(small, integer_or(e, "instances", 10, where), seed, number_or(e, "tolerance", 1e-10, where))};
  }
  if (type == "sandwich") {
    check_keys(e, {"type", "instances", "slack"}, where);
    return {run_besov_sandwich(grid, integer_or(e, "instances", 20, where), seed, number_or(e, "slack", 1e-12, where))};
  }
  if (type == "support-law") {
    check_keys(e, {"type", "pieces", "tolerance", "control_floor"}, where);
    SupportLawOptions o;
    o.seed = seed;
    o.pieces = integer_or(e, "pieces", o.pieces, where);
    o.tolerance = number_or(e, "tolerance", o.tolerance, where);
    o.control_floor = number_or(e, "control_floor", o.control_floor, where);
    return {run_support_law_check(o)};
  }
  throw InvalidArgument(where + ".type: unknown experiment type '" + type + "'");
}

/// Experiment lists of the named suites.
inline json suite_experiments(const std::string& suite) {
  const json sharpness = json::array({
      {{"type", "closed-form"}},
      {{"type", "sharpness"}, {"name", "sharpness s=0"}, {"output", {{"s", 0.0}}}},
      {{"type", "sharpness"}, {"name", "sharpness s=0.5"}, {"output", {{"s", 0.5}}}},
      {{"type", "sharpness"}, {"name", "sharpness s=1"}, {"output", {{"s", 1.0}}}},
      {{"type", "sharpness"}, {"name", "diagonal"}, {"inputs", "diagonal"}, {"tolerance", 0.05}},
      {{"type", "sharpness"}, {"name", "mixed m2=-0.5"}, {"symbol", {{"family", "mixed"}, {"m2", -0.5}}}},
      {{"type", "boundedness"}, {"name", "bounded (0,0)"}, {"s1", 0.0}, {"s2", 0.0}},
      {{"type", "boundedness"}, {"name", "bounded (0.25,-0.25)"}, {"s1", 0.25}, {"s2", -0.25}},
      {{"type", "boundedness"}, {"name", "bounded (0.1,-0.3)"}, {"s1", 0.1}, {"s2", -0.3}},
      {{"type", "boundedness"}, {"name", "unbounded diagonal"}, {"s1", -0.5}, {"s2", -0.5}, {"families", {"diagonal"}}},
      {{"type", "boundedness"},
       {"name", "kato-ponce control"},
       {"symbol", {{"family", "identity"}}},
       {"s1", 1.0},
       {"s2", 0.0},
       {"families", {"high-low"}}},
  });
  if (suite == "sharpness") return sharpness;
  if (suite == "lemmas") return json::array({{{"type", "lemmas"}}});
  if (suite == "all") {
    json all = sharpness;
    for (const auto& n : {json{{"s", 0.0}, {"p", 2.0}, {"q", 2.0}}, json{{"s", 1.0}, {"p", 2.0}, {"q", 2.0}},
                          json{{"s", 0.5}, {"p", 4.0}, {"q", 1.0}}, json{{"kind", "sobolev"}, {"s", 0.0}, {"p", 2.0}},
                          json{{"kind", "sobolev"}, {"s", 1.0}, {"p", 2.0}},
                          json{{"kind", "sobolev"}, {"s", 0.5}, {"p", 4.0}}})
      all.push_back({{"type", "norm-scaling"}, {"norm", n}});
    all.push_back({{"type", "sandwich"}});
    all.push_back({{"type", "path-agreement"}});
    all.push_back({{"type", "support-law"}});
    all.push_back({{"type", "lemmas"}});
    return all;
  }
  throw InvalidArgument("unknown suite '" + suite + "' (expected sharpness, lemmas or all)");
}

struct RunConfig {
  GridSpec grid;
  std::uint64_t seed = 1;
  json experiments = json::array();
  std::string out_dir = ".";
};

/// {"grid": {...}, "seed": n, "experiments": [...], "out_dir": "..."}; validated
/// before anything runs.
inline RunConfig run_config_from_json(const json& j) {
  io_detail::check_keys(j, {"grid", "seed", "experiments", "out_dir", "suite"}, "config");
  RunConfig c;
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"), "config.grid");
  if (j.contains("seed")) {
    if (!io_detail::is_count(j.at("seed"))) throw InvalidArgument("config.seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("suite")) {
    if (!j.at("suite").is_string()) throw InvalidArgument("config.suite: expected a string");
    c.experiments = suite_experiments(j.at("suite").get<std::string>());
  }
  if (j.contains("experiments")) {
    if (!j.at("experiments").is_array()) throw InvalidArgument("config.experiments: expected an array");
    for (const auto& e : j.at("experiments")) c.experiments.push_back(e);
  }
  if (c.experiments.empty()) throw InvalidArgument("config: the experiment list is empty");
  for (std::size_t i = 0; i < c.experiments.size(); ++i)
    if (!c.experiments[i].is_object() || !c.experiments[i].contains("type"))
      throw InvalidArgument("config.experiments[" + std::to_string(i) + "]: missing key 'type'");
  c.out_dir = io_detail::string_or(j, "out_dir", c.out_dir, "config");
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

}  // namespace besovbilin
