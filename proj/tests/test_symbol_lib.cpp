#include <besovbilin/symbol_lib.hpp>

#include <gtest/gtest.h>

using namespace besovbilin;

namespace {

const GridSpec kDesk = GridSpec::desk();

double eval(const Symbol& s, double xi1, double xi2) {
  return std::get<SeparableSum>(s.representation()).evaluate(std::array<double, 1>{xi1}, std::array<double, 1>{xi2});
}

double log2_slope(const std::vector<double>& ks, const std::vector<double>& vals) {
  const double n = static_cast<double>(ks.size());
  double mk = 0, mv = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) mk += ks[i] / n, mv += std::log2(vals[i]) / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    num += (ks[i] - mk) * (std::log2(vals[i]) - mv);
    den += (ks[i] - mk) * (ks[i] - mk);
  }
  return num / den;
}

}  // namespace

TEST(SharpnessSymbols, BandCapacity) {
  EXPECT_EQ(max_symbol_band(kDesk), 8);
  EXPECT_THROW(make_sharpness_symbol_hormander(5, 9, kDesk), InvalidArgument);
  EXPECT_THROW(make_sharpness_symbol_hormander(6, 5, kDesk), InvalidArgument);
  EXPECT_THROW(make_sharpness_symbol_product(-0.25, -0.25, 0, 5, kDesk), InvalidArgument);
  EXPECT_NO_THROW(make_sharpness_symbol_hormander(10, 12, GridSpec{1, std::size_t{1} << 16, 4.0}));
}

TEST(SharpnessSymbols, HormanderValues) {
  const Symbol s = make_sharpness_symbol_hormander(5, 8, kDesk);
  for (int k = 5; k <= 8; ++k) {
    const double p = std::ldexp(1.0, k);
    EXPECT_DOUBLE_EQ(eval(s, 0.5 * p, p), std::pow(2.0, -0.5 * k));
    EXPECT_EQ(eval(s, p, std::ldexp(p, 5)), 0.0);
  }
}

TEST(SharpnessSymbols, ProductValues) {
  const double m1 = -0.25, m2 = -0.25;
  const Symbol s = make_sharpness_symbol_product(m1, m2, 5, 8, kDesk);
  for (int k1 = 5; k1 <= 8; ++k1)
    for (int k2 = 5; k2 <= 8; ++k2)
      EXPECT_DOUBLE_EQ(eval(s, std::ldexp(1.0, k1), std::ldexp(1.0, k2)), std::pow(2.0, m1 * k1 + m2 * k2));
  EXPECT_EQ(eval(s, 0.0, 64.0), 0.0);
}

TEST(SharpnessSymbols, MixedValues) {
  const Symbol s = make_sharpness_symbol_mixed(-0.5, 5, 8, kDesk);
  for (int j = 5; j <= 8; ++j) EXPECT_DOUBLE_EQ(eval(s, 0.0, std::ldexp(1.0, j)), std::pow(2.0, -0.5 * j));
  EXPECT_EQ(eval(s, 3.0, 64.0), 0.0);
  EXPECT_EQ(eval(s, 3.0, 100.0), 0.0);
}

TEST(SharpnessSymbols, SeparableEvaluationMatchesTermProducts) {
  const Symbol s = make_sharpness_symbol_hormander(5, 8, kDesk);
  const auto& sum = std::get<SeparableSum>(s.representation());
  for (int i = 0; i < 200; ++i) {
    const double xi1 = -300.0 + 3.1 * i, xi2 = 400.0 - 2.3 * i;
    double direct = 0.0;
    for (const auto& t : sum.terms) direct += t.coefficient * t.m1(xi1) * t.m2(xi2);
    EXPECT_NEAR(eval(s, xi1, xi2), direct, 1e-15);
  }
}

TEST(SharpnessSymbols, OnlyMatchingTermSurvives) {
  const Symbol s = make_sharpness_symbol_hormander(5, 8, kDesk);
  const auto& sum = std::get<SeparableSum>(s.representation());
  for (int j = 5; j <= 8; ++j) {
    double matched = 0.0;
    std::vector<double> products;
    const SpectralField F1 = forward_transform(make_modulated_bump(kDesk, j, -1));
    const SpectralField F2 = forward_transform(make_modulated_bump(kDesk, j, 1));
    for (std::size_t t = 0; t < sum.terms.size(); ++t) {
      const int k = 5 + static_cast<int>(t);
      double a = 0.0, b = 0.0;
      for_each_frequency(kDesk, [&](std::size_t i, std::span<const double> xi) {
        a = std::max(a, std::abs(sum.terms[t].m1(xi) * F1.values[i]));
        b = std::max(b, std::abs(sum.terms[t].m2(xi) * F2.values[i]));
      });
      if (k == j) matched = a * b;
      else products.push_back(a * b);
    }
    // Other terms only see FFT round-off of the input spectra.
    EXPECT_GT(matched, 0.1);
    for (double p : products) EXPECT_LE(p, 1e-13 * matched) << "j=" << j;
  }
}

TEST(TestFunctions, ModulatedBumpIsModulatedLowBump) {
  const SampledField low = make_low_bump(kDesk);
  for (int j : {5, 8})
    for (int sign : {-1, 1}) {
      const SampledField f = make_modulated_bump(kDesk, j, sign);
      SampledField direct = low;
      for (std::size_t k = 0; k < kDesk.size(); ++k)
        direct.values[k] *= std::polar(1.0, sign * std::ldexp(1.0, j) * kDesk.coordinate(k));
      EXPECT_LE(max_relative_error(f.values, direct.values), 1e-12);
      double worst = 0.0;
      for (std::size_t k = 0; k < kDesk.size(); ++k)
        worst = std::max(worst, std::abs(std::abs(f.values[k]) - std::abs(low.values[k])));
      EXPECT_LE(worst, 1e-14);
    }
  EXPECT_THROW(make_modulated_bump(kDesk, 9, 1), InvalidArgument);
  EXPECT_THROW(make_modulated_bump(kDesk, 5, 0), InvalidArgument);
}

TEST(TestFunctions, ModulatedBumpSpectralSupport) {
  for (int j = 5; j <= 8; ++j) {
    const SpectralField F = forward_transform(make_modulated_bump(kDesk, j, 1));
    const double lo = std::ldexp(std::pow(2.0, -0.25), j), hi = std::ldexp(std::pow(2.0, 0.25), j);
    double outside = 0.0, peak = 0.0;
    for_each_frequency(kDesk, [&](std::size_t i, std::span<const double> xi) {
      peak = std::max(peak, std::abs(F.values[i]));
      if (xi[0] < lo || xi[0] > hi) outside = std::max(outside, std::abs(F.values[i]));
    });
    EXPECT_LE(outside, 1e-12 * peak);
  }
}

TEST(TestFunctions, LowBumpRealAndEven) {
  const SampledField f = make_low_bump(kDesk);
  const std::size_t N = kDesk.size();
  double imag = 0.0, odd = 0.0;
  for (std::size_t k = 1; k < N; ++k) {
    imag = std::max(imag, std::abs(f.values[k].imag()));
    odd = std::max(odd, std::abs(f.values[k] - f.values[N - k]));
  }
  EXPECT_LE(imag, 1e-15);
  EXPECT_LE(odd, 1e-15);
}

TEST(RandomGenerators, Deterministic) {
  const GridSpec g{1, 64, 2.0};
  EXPECT_EQ(make_random_band_limited(g, 8.0, 3).values, make_random_band_limited(g, 8.0, 3).values);
  EXPECT_NE(make_random_band_limited(g, 8.0, 3).values, make_random_band_limited(g, 8.0, 4).values);
  const LatticeBox box = LatticeBox::centered(g, 8);
  EXPECT_EQ(make_random_general_symbol(g, box, box, 3.0, 1).values, make_random_general_symbol(g, box, box, 3.0, 1).values);
}

TEST(FiniteDifferences, KnownStencils) {
  const auto d1 = central_difference_weights(1, 1);
  EXPECT_NEAR(d1[0], -0.5, 1e-15);
  EXPECT_NEAR(d1[1], 0.0, 1e-15);
  EXPECT_NEAR(d1[2], 0.5, 1e-15);
  const auto d2 = central_difference_weights(2, 1);
  EXPECT_NEAR(d2[0], 1.0, 1e-15);
  EXPECT_NEAR(d2[1], -2.0, 1e-15);
  const auto d14 = central_difference_weights(1, 2);
  EXPECT_NEAR(d14[0], 1.0 / 12, 1e-15);
  EXPECT_NEAR(d14[1], -2.0 / 3, 1e-15);
  EXPECT_NEAR(d14[3], 2.0 / 3, 1e-15);
  // Order-4 stencil is exact on quartics.
  const auto d4 = central_difference_weights(4, 3);
  double s = 0.0;
  for (int i = -3; i <= 3; ++i) s += d4[static_cast<std::size_t>(i + 3)] * std::pow(i, 4);
  EXPECT_NEAR(s, 24.0, 1e-11);
  EXPECT_THROW(central_difference_weights(3, 1), InvalidArgument);
}

TEST(Seminorm, IdentitySymbol) {
  const SeminormTable t = seminorm_estimate(make_identity_symbol(), ClassSpec::hormander(0.0), {kDesk, 0, 6, 16});
  EXPECT_DOUBLE_EQ(t.entry(0, 0, 0).value, 1.0);
  // Differences of a constant are pure round-off: eps sum|w_b1| sum|w_b2| / h^(b1+b2).
  const double h = 0.5 * kDesk.frequency_spacing();
  auto mass = [](int order) {
    double m = 0.0;
    for (double w : central_difference_weights(order, std::max(1, stencil_radius(order)))) m += std::abs(w);
    return order == 0 ? 1.0 : m;
  };
  for (const auto& e : t.entries)
    if (e.beta1 + e.beta2 > 0) {
      const double bound = 4e-16 * mass(e.beta1) * mass(e.beta2) / std::pow(h, e.beta1 + e.beta2);
      EXPECT_LE(e.value, bound) << e.beta1 << " " << e.beta2;
    }
}

TEST(Seminorm, SharpnessSymbolInCriticalClass) {
  const Symbol s = make_sharpness_symbol_hormander(4, 8, kDesk);
  const SeminormTable t = seminorm_estimate(s, ClassSpec::hormander(-0.5), {kDesk, 4, 7, 32});
  for (const auto& e : t.entries) EXPECT_TRUE(std::isfinite(e.value));
  const auto& zero = t.entry(0, 0, 0).per_band;
  const double hi = *std::max_element(zero.begin(), zero.end());
  const double lo = *std::min_element(zero.begin(), zero.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 10.0);
  // Derivative entries may be large on the lowest bands but never grow with k.
  for (std::size_t b = 1; b < t.bands.size(); ++b) EXPECT_LE(t.band_max(b), 10.0 * t.band_max(b - 1));
  EXPECT_TRUE(std::isfinite(t.entry(0, 1, 1).value));
}

TEST(Seminorm, SharpnessSymbolDecaysInOrderZeroClass) {
  // Band k also meets the k-1 term, so the symbol starts one band below the table.
  const Symbol s = make_sharpness_symbol_hormander(3, 8, kDesk);
  const SeminormTable t = seminorm_estimate(s, ClassSpec::hormander(0.0), {kDesk, 4, 7, 32});
  std::vector<double> ks(t.bands.begin(), t.bands.end());
  EXPECT_NEAR(log2_slope(ks, t.entry(0, 0, 0).per_band), -0.5, 0.1);
}

TEST(Seminorm, ProductSymbolStableAcrossBands) {
  const Symbol s = make_sharpness_symbol_product(-0.25, -0.25, 4, 8, kDesk);
  const SeminormTable t = seminorm_estimate(s, ClassSpec::product(-0.25, -0.25), {kDesk, 4, 7, 32});
  const auto& zero = t.entry(0, 0, 0).per_band;
  const double hi = *std::max_element(zero.begin(), zero.end());
  const double lo = *std::min_element(zero.begin(), zero.end());
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 10.0);
  for (std::size_t b = 1; b < t.bands.size(); ++b) EXPECT_LE(t.band_max(b), 10.0 * t.band_max(b - 1));
}

TEST(Seminorm, InvariantUnderTermReordering) {
  const Symbol s = make_sharpness_symbol_hormander(4, 7, kDesk);
  SeparableSum reversed = std::get<SeparableSum>(s.representation());
  std::reverse(reversed.terms.begin(), reversed.terms.end());
  const SeminormOptions opt{kDesk, 4, 6, 16};
  const SeminormTable a = seminorm_estimate(s, ClassSpec::hormander(-0.5, 2), opt);
  const SeminormTable b = seminorm_estimate(Symbol(reversed), ClassSpec::hormander(-0.5, 2), opt);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    EXPECT_NEAR(a.entries[i].value, b.entries[i].value, 1e-12 * std::max(1.0, a.entries[i].value));
}

TEST(Seminorm, SampledSymbolOnSmallGrid) {
  const GridSpec g{1, 32, 1.0};
  const LatticeBox box = LatticeBox::centered(g, 16);
  const Symbol s(make_random_general_symbol(g, box, box, 3.0, 4));
  const SeminormTable t = seminorm_estimate(s, ClassSpec::hormander(0.0, 2), {g, 0, 3, 4});
  for (const auto& e : t.entries) EXPECT_TRUE(std::isfinite(e.value));
  EXPECT_GT(t.entry(1, 0, 0).value, 0.0);
  EXPECT_THROW(seminorm_estimate(s, ClassSpec::hormander(0.0), {GridSpec{2, 16, 1.0}, 0, 2, 4}), InvalidArgument);
}
