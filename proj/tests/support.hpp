#ifndef AMO_TESTS_SUPPORT_HPP
#define AMO_TESTS_SUPPORT_HPP

#include "amo/eigensolve.hpp"

namespace amo::testsupport {

inline const Frequency& golden() {
  static Frequency f = Frequency::from_rational(Rational(4181, 6765));
  return f;
}

// Deep-localization operator: ln lambda = 1, non-resonant phase.
inline OperatorParams localized_params() {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.5, {});
  p.ln_lambda = 1.0;
  return p;
}

// First box eigenvalue in [e_lo, e_hi] whose eigenvector anchors within
// max_center_dist of the box midpoint; fills *profile_out if given.
inline Real centered_eigenvalue(const OperatorParams& params, const BoxSpec& box,
                                double e_lo, double e_hi, long long max_center_dist,
                                SolutionProfile* profile_out = nullptr) {
  Real tol = pow(Real(2), -200);
  auto evs = box_eigenvalues(params, box, Real(e_lo), Real(e_hi), tol);
  long long mid = (box.a + box.b) / 2;
  for (const Real& e : evs) {
    SolutionProfile pr = eigenvector_profile(params, box, e);
    if (std::llabs(pr.anchor - mid) <= max_center_dist) {
      if (profile_out) *profile_out = pr;
      return pr.energy;
    }
  }
  throw std::runtime_error("no centered eigenvalue in the window");
}

}  // namespace amo::testsupport

#endif
