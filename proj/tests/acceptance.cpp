// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <besovbilin.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace besovbilin;

namespace {

const GridSpec kDesk = GridSpec::desk();

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// F^{-1}phi by the direct lattice sum (dxi/2pi) sum_m phi(xi_m) e^{i x xi_m}; phi is
// supported in |xi| < sqrt 2 so only a few lattice points contribute.
std::vector<cplx> low_bump_direct(const GridSpec& g) {
  const ScalarWindow phi = make_sharpness_windows().bump;
  const double dxi = g.frequency_spacing();
  const long reach = static_cast<long>(std::ceil(2.0 / dxi));
  std::vector<cplx> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = g.coordinate(k);
    cplx s(0.0);
    for (long m = -reach; m <= reach; ++m) s += phi(m * dxi) * std::polar(1.0, x * m * dxi);
    out[k] = s * dxi / (2 * kPi);
  }
  return out;
}

double closed_form_error(const GridSpec& g, int j, double* seconds) {
  const Symbol def = make_sharpness_symbol_hormander(5, 8, g);
  const auto t0 = std::chrono::steady_clock::now();
  const SampledField T = apply_bilinear(def, make_modulated_bump(g, j, -1), make_modulated_bump(g, j, 1));
  *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto low = low_bump_direct(g);
  std::vector<cplx> ref(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) ref[k] = std::pow(2.0, -0.5 * j) * low[k] * low[k];
  return max_relative_error(T.values, ref);
}

Outcome closed_form() {
  Outcome o;
  const GridSpec fine{1, std::size_t{1} << 15, 32.0};
  for (int j = 5; j <= 8; ++j) {
    double t = 0, t2 = 0;
    const double e = closed_form_error(kDesk, j, &t);
    const double e2 = closed_form_error(fine, j, &t2);
    o.detail << " j=" << j << ":" << e << " (2N " << e2 << ", " << t << " s)";
    o.require(e <= 1e-6 && t <= 10.0, "j=" + std::to_string(j));
    // Both resolutions sit at round-off; "stable" allows one decade of round-off growth.
    o.require(e2 <= 1e-6 && e2 <= 10.0 * e + 1e-14, "2N j=" + std::to_string(j));
  }
  return o;
}

Outcome modulated_identity() {
  Outcome o;
  const auto low = low_bump_direct(kDesk);
  for (double m2 : {-0.5, -0.25}) {
    const Symbol mixed = make_sharpness_symbol_mixed(m2, 5, 8, kDesk);
    double worst = 0.0;
    for (int j = 5; j <= 8; ++j) {
      const SampledField T = apply_bilinear(mixed, make_low_bump(kDesk), make_modulated_bump(kDesk, j, 1));
      std::vector<cplx> ref(kDesk.size());
      for (std::size_t k = 0; k < kDesk.size(); ++k)
        ref[k] = std::pow(2.0, j * m2) * std::polar(1.0, std::ldexp(1.0, j) * kDesk.coordinate(k)) * low[k] * low[k];
      worst = std::max(worst, max_relative_error(T.values, ref));
    }
    o.detail << " m2=" << m2 << ":" << worst;
    o.require(worst <= 1e-6, "m2=" + std::to_string(m2));
  }
  return o;
}

Outcome sharpness_slopes() {
  Outcome o;
  SweepConfig c;
  c.symbol = {SymbolFamily::def_symbol, 5, 8, -0.25, -0.25};
  c.grid = kDesk;
  for (double s : {0.0, 0.5, 1.0}) {
    c.output = NormSpec::besov(s, 2.0, 2.0);
    const ExperimentReport r = run_sharpness_sweep(c);
    o.detail << " s=" << s << ":" << *r.slope;
    o.require(std::abs(*r.slope - (s - 0.5)) <= 0.1, "s=" + std::to_string(s));
  }
  c.output = NormSpec::besov(0.0, 2.0, 2.0);
  c.inputs = InputFamily::diagonal;
  const ExperimentReport d = run_sharpness_sweep(c);
  o.detail << " diagonal:" << *d.slope;
  o.require(std::abs(*d.slope + 0.5) <= 0.05, "diagonal");
  return o;
}

Outcome norm_scaling() {
  Outcome o;
  struct Tuple { double s, p, q; };
  for (const Tuple t : {Tuple{0, 2, 2}, Tuple{1, 2, 2}, Tuple{0.5, 4, 1}}) {
    std::vector<double> sob, bes;
    for (int j = 5; j <= 8; ++j) {
      const SampledField f = make_modulated_bump(kDesk, j, 1);
      const double scale = std::pow(2.0, j * t.s);
      sob.push_back(sobolev_norm(f, {t.s, t.p}) / scale);
      bes.push_back(besov_norm(f, {t.s, t.p, t.q, std::nullopt}) / scale);
    }
    o.detail << " (" << t.s << "," << t.p << "," << t.q << "): L " << spread(sob) << " B " << spread(bes);
    o.require(spread(sob) <= 1.05 && spread(bes) <= 1.05, "tuple s=" + std::to_string(t.s));
  }
  return o;
}

Outcome sandwich() {
  Outcome o;
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SampledField f = make_random_band_limited(kDesk, std::ldexp(1.0, 1 + static_cast<int>(seed % 8)), 100 + seed);
    const double l2 = lp_norm(f, 2.0);
    const double b = besov_norm(f, {0.0, 2.0, 2.0, std::nullopt});
    if (b < std::sqrt(0.5) * l2 * (1 - 1e-12) || b > l2 * (1 + 1e-12)) ++violations;
  }
  o.detail << " violations=" << violations;
  o.require(violations == 0, "violations");
  return o;
}

Outcome path_agreement() {
  Outcome o;
  const ExperimentReport r = run_path_agreement(GridSpec{1, 64, 2.0}, 10, 21, 1e-10);
  double worst = 0.0;
  for (const auto& rec : r.records) worst = std::max(worst, rec.ratio);
  o.detail << " instances=" << r.records.size() << " max deviation=" << worst;
  o.require(r.records.size() == 10 && worst <= 1e-10, "deviation");
  return o;
}

Outcome support_law() {
  Outcome o;
  const ExperimentReport r = run_support_law_check({});
  double leak = 0.0, control = 0.0;
  for (const auto& rec : r.records) {
    leak = std::max(leak, rec.output_norm);
    control = std::max(control, rec.ratio);
  }
  o.detail << " pieces=" << r.records.size() << " max leakage=" << leak << " shrunk-box leakage=" << control;
  o.require(r.records.size() == 20 && leak <= 1e-10, "leakage");
  o.require(control > 1e-3, "control");
  return o;
}

Outcome boundedness() {
  Outcome o;
  const SymbolDescriptor def{SymbolFamily::def_symbol, 5, 8, -0.25, -0.25};
  for (const auto& [s1, s2] : std::vector<std::pair<double, double>>{{0.0, 0.0}, {0.25, -0.25}, {0.1, -0.3}}) {
    BoundednessConfig c;
    c.symbol = def;
    c.s1 = s1;
    c.s2 = s2;
    c.s = s1 + s2;
    c.grid = kDesk;
    const ExperimentReport r = run_boundedness_probe(c);
    double worst = 0.0;
    for (std::size_t f = 0; f < c.families.size(); ++f) {
      std::vector<double> v;
      for (std::size_t i = 0; i < 4; ++i) v.push_back(r.records[f * 4 + i].ratio);
      worst = std::max(worst, spread(v));
    }
    o.detail << " (" << s1 << "," << s2 << "):" << worst;
    o.require(worst <= 4.0, "admissible tuple");
  }
  BoundednessConfig bad;
  bad.symbol = def;
  bad.s1 = bad.s2 = -0.5;
  bad.s = -1.0;
  bad.families = {InputFamily::diagonal};
  bad.grid = kDesk;
  const ExperimentReport r = run_boundedness_probe(bad);
  const double growth = r.records.back().ratio / r.records.front().ratio;
  o.detail << " inadmissible growth=" << growth;
  o.require(growth >= 2.0, "inadmissible growth");
  return o;
}

Outcome lemmas() {
  Outcome o;
  LemmaOptions opt;
  opt.grid = kDesk;
  for (const auto& r : run_lemma_checks(opt)) {
    const auto it = r.metrics.find("ratio_spread");
    o.detail << " {" << r.name << ": " << (it != r.metrics.end() ? it->second : 0.0) << "/" << r.tolerance << "}";
    o.require(r.pass, r.name);
  }
  return o;
}

Outcome infrastructure() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::vector<cplx> v(kDesk.size());
  for (auto& z : v) {
    const double re = normal(rng);
    z = cplx(re, normal(rng));
  }
  const SampledField f(kDesk, v);
  const double round_trip = max_relative_error(inverse_transform(forward_transform(f)).values, f.values);

  double partition = 0.0;
  const auto psi = make_psi_family(10);
  for (int i = 0; i <= 100000; ++i) {
    const double xi = 1024.0 * i / 100000.0;
    double s = 0.0;
    for (const auto& w : psi) s += w(xi);
    partition = std::max(partition, std::abs(s - 1.0));
  }
  for (int i = 0; i <= 10000; ++i) {
    const double t = -3.0 + 6.0 * i / 10000.0;
    double s = 0.0;
    for (long nu = -5; nu <= 5; ++nu) s += make_cube_partition(nu)(t);
    partition = std::max(partition, std::abs(s - 1.0));
  }

  const SampledField f1 = make_random_band_limited(kDesk, 100.0, 1), f2 = make_random_band_limited(kDesk, 100.0, 2);
  std::vector<cplx> prod(kDesk.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = f1.values[k] * f2.values[k];
  double identity = 0.0;
  for (EvaluationPath p : {EvaluationPath::automatic, EvaluationPath::separable, EvaluationPath::x_independent})
    identity = std::max(identity, max_relative_error(apply_bilinear(make_identity_symbol(), f1, f2, p).values, prod));

  o.detail << " round trip=" << round_trip << " partition=" << partition << " identity=" << identity;
  o.require(round_trip <= 1e-12, "round trip");
  o.require(partition <= 1e-13, "partition");
  o.require(identity <= 1e-8, "identity");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form identity", closed_form},
      {"modulated identity", modulated_identity},
      {"sharpness slopes", sharpness_slopes},
      {"norm scaling", norm_scaling},
      {"Besov-L2 sandwich", sandwich},
      {"path agreement", path_agreement},
      {"spectral support law", support_law},
      {"boundedness uniformity", boundedness},
      {"lemma bundle", lemmas},
      {"infrastructure exactness", infrastructure},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu %s  %s:%s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
