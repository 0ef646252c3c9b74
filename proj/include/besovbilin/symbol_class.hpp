#pragma once

#include <besovbilin/error.hpp>

#include <cmath>
#include <variant>

namespace besovbilin {

/// Bilinear Hormander class BS^m_{0,0}: weight (1 + |xi1| + |xi2|)^m.
struct HormanderClass {
  double m;
};

/// Product class BS^{(m1,m2)}_{0,0}: weight (1 + |xi1|)^{m1} (1 + |xi2|)^{m2}.
struct ProductClass {
  double m1;
  double m2;
};

struct ClassSpec {
  std::variant<HormanderClass, ProductClass> variant = HormanderClass{0.0};
  /// Highest derivative order per variable.
  int max_order = 4;

  static ClassSpec hormander(double m, int max_order = 4) { return {HormanderClass{m}, max_order}; }
  static ClassSpec product(double m1, double m2, int max_order = 4) { return {ProductClass{m1, m2}, max_order}; }

  /// Class weight at frequency magnitudes |xi1|, |xi2|.
  double weight(double xi1_norm, double xi2_norm) const {
    if (const auto* h = std::get_if<HormanderClass>(&variant)) return std::pow(1.0 + xi1_norm + xi2_norm, h->m);
    const auto& p = std::get<ProductClass>(variant);
    return std::pow(1.0 + xi1_norm, p.m1) * std::pow(1.0 + xi2_norm, p.m2);
  }

  /// Dyadic size of the class weight on the piece with band indices (k1, k2):
  /// 2^{max(k1,k2) m} or 2^{k1 m1 + k2 m2}.
  double band_weight_exponent(int k1, int k2) const {
    if (const auto* h = std::get_if<HormanderClass>(&variant)) return (k1 > k2 ? k1 : k2) * h->m;
    const auto& p = std::get<ProductClass>(variant);
    return k1 * p.m1 + k2 * p.m2;
  }

  void validate() const {
    if (max_order < 0) throw InvalidArgument("class max_order must be >= 0");
  }
};

}  // namespace besovbilin
