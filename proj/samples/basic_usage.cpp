// Expected top-ell path sums of a small matrix under two map families,
// next to the two-sided bound and the Orlicz-norm form of the upper bound.

#include <cstdio>

#include "osb/osb.hpp"

int main() {
  const osb::Matrix a = osb::Matrix::from_rows({{4, 0, 1}, {2, 3, 0}, {0, 1, 5}});
  const double cols = static_cast<double>(a.cols());

  for (const osb::MapFamily& g : {osb::symmetric_group(3), osb::full_mapping_family(3, 3)}) {
    const osb::MeasureCertificate cert = osb::require_hypotheses(g);
    const double cg = cert.c_g().to_double();
    std::printf("%s  |G| = %llu  C_G = %s\n", g.descriptor().c_str(), static_cast<unsigned long long>(g.size()),
                cert.c_g().str().c_str());
    for (std::size_t ell = 1; ell <= a.rows(); ++ell) {
      const double e = osb::expectation_exact(a, g, ell).value;
      const double top = a.top_sum(ell * a.cols()) / cols;
      const double norm = osb::luxemburg_norm(a.entries(), osb::MjFunction(ell * a.cols()));
      std::printf("  ell=%zu  %.6f <= E S = %.6f <= %.6f  (Orlicz form %.6f)\n", ell,
                  osb::main_lower_constant(cg) * top, e, 2.0 * top, 2.0 / cols * norm);
    }
  }

  const std::vector<double> x{3.0, 1.0};
  std::printf("K(x, 1.5) = %.6f   ||x||_(1/2,2) = %.6f   ||x||_2 = %.6f\n", osb::k_functional(x, 1.5),
              osb::interpolation_norm(x, 2.0), osb::lp_norm(x, 2.0));
  return 0;
}
