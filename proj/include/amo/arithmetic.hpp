#ifndef AMO_ARITHMETIC_HPP
#define AMO_ARITHMETIC_HPP

#include <optional>
#include <utility>
#include <vector>

#include "amo/numeric.hpp"

namespace amo {

// Continued-fraction expansion of x in (0,1): coefficients a_1..a_m and
// convergents (p_n, q_n) starting from p_1/q_1 = 1/a_1.
struct CfExpansion {
  std::vector<Int> coeffs;
  std::vector<std::pair<Int, Int>> convergents;
};

CfExpansion continued_fraction(const Rational& x, int max_depth);

struct Frequency {
  Rational value;  // exact rational in (0,1), gcd-reduced
  std::vector<Int> cf_coeffs;
  std::vector<std::pair<Int, Int>> convergents;
  std::optional<std::pair<double, double>> dio_params;  // fitted (kappa, tau)

  static Frequency from_rational(const Rational& x, int max_depth = 128);

  bool has_convergent_denominator(const Int& q) const;
};

struct ResonanceEntry {
  long long k = 0;       // signed site offset
  double strength = 0;   // -ln||2theta + k alpha|| / |k|, nats per site
};

struct ResonanceSequence {
  std::vector<ResonanceEntry> entries;  // sorted by |k|
  double threshold = 0;                 // varsigma, nats per site
  double fitted_gap_c = 0;              // fitted c in |K_i| >= c e^{c |K_{i-1}|}
};

struct Phase {
  Rational value;  // exact rational in [0,1)
  ResonanceSequence resonances;
  double delta_hat = 0;       // finite-scan lower bound on delta(alpha, theta)
  bool excluded_flag = false;  // 2 theta in alpha Z + Z within the scan range
};

enum class ResonanceMode { beta, delta };

struct ResonanceEstimate {
  double estimate = 0;   // nats per site, lower bound over the scan range
  long long argmax_k = 0;
};

// max over 1 <= |k| <= K_max of -ln||k alpha||/|k| (beta) or
// -ln||2 theta + k alpha||/|k| (delta). Norms are exact rationals.
ResonanceEstimate resonance_exponent(ResonanceMode mode, const Frequency& alpha,
                                     const Phase* theta, long long k_max);

// All k with 1 <= |k| <= K_max and ||2theta + k alpha|| <= e^{-varsigma |k|},
// subject to the scan noise floor ||.|| <= 1/(4 K_max).
ResonanceSequence find_resonances(const Frequency& alpha, const Phase& theta,
                                  double varsigma, long long k_max);

// Greedy nested construction of a phase with prescribed resonances at
// K_list, each of strength ~ delta_target. Post-verified by a rescan.
Phase construct_phase(const Frequency& alpha, double delta_target,
                      const std::vector<long long>& k_list,
                      long long verify_k_max = 200);

// A deep rational frequency for which construct_phase can realize the
// requested resonance list at the requested strength. One or no resonances:
// a deep golden-ratio convergent. Two resonances: the gap K_2 - K_1 must
// carry a frequency near-resonance of size ~ e^{-delta K_1}, so the value is
// assembled as a/g + r/g with g the gap and r a grid rounding of
// e^{-delta K_1}; a is scanned for the flattest resulting beta estimate.
Frequency compatible_frequency(double delta_target,
                               const std::vector<long long>& k_list);

struct X0Eta {
  long long x0 = 0;
  double eta = 0;          // nats per site
  bool integer_hit = false;
};

// Minimizer of |sin pi(2theta + x alpha)| over |x| <= 2|l| and the solution
// of |sin pi(2theta + x0 alpha)| = e^{-eta |l|}. Ties: smallest |x|, then
// positive x.
X0Eta locate_x0_eta(const Frequency& alpha, const Phase& theta, long long l);

struct LnSinSum {
  double value = 0;    // nats
  long long k0 = 0;    // index of the dropped minimal term
};

// S = sum_{k != k0} ln|sin pi(x + k alpha)| + (q_n - 1) ln 2 over
// 0 <= k <= q_n - 1, with k0 the argmin of |sin|.
LnSinSum ln_sin_sum(const Rational& x, const Frequency& alpha, const Int& q_n);

}  // namespace amo

#endif
