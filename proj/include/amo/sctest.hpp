#ifndef AMO_SCTEST_HPP
#define AMO_SCTEST_HPP

#include <vector>

#include "amo/eigensolve.hpp"

namespace amo {

// W(n) = u(n+1) v(n) - u(n) v(n+1) in sign/log form; the same-sign branch
// subtracts at matched log scale so near-cancellation loses no exponent.
// Inputs are aligned arrays of equal length >= 2; output has length - 1.
std::vector<SignLog> wronskian_profile(const std::vector<SignLog>& u,
                                       const std::vector<SignLog>& v);

enum class MidpointBranch { sum, difference };

struct PalindromeVerdict {
  long long k_i = 0;
  double wronskian_sup = 0;     // max |W(u, u_i)|, both l2-normalized
  double predicted_bound = 0;   // 8 pi lambda e^{-(delta-eps)|k_i|}
  double potential_defect = 0;  // max |V(n) - V(k_i - n)| over the window
  MidpointBranch branch = MidpointBranch::difference;
  double midpoint_norm = 0;     // ||Phi(m) + iota Phi_i(m)||, winning iota
  double transport_gap = 0;     // | ||Phi(0)|| - ||Phi(k_i + 1)|| |
  double phi0_norm = 0;
  long long anchor = 0;
};

// Reflect the eigenvector through k_i/2 and test the almost-palindrome
// mechanism: potential defect, Wronskian near-constancy, parity-split
// midpoint smallness, and the transport gap between Phi(0) and its mirror.
// A potential defect above the predicted bound means the requested k_i is
// not a resonance of this phase.
PalindromeVerdict palindrome_test(const OperatorParams& params,
                                  const SolutionProfile& eigvec, long long k_i,
                                  double delta, double eps);

struct TransportReport {
  size_t vectors = 0;          // eigenvectors successfully profiled
  size_t near_pairs = 0;       // pairs with |anchor - k_i/2| <= |k_i|/2
  size_t symmetric_pairs = 0;  // near pairs, transport_gap <= 0.2 ||Phi(0)||
  double symmetric_fraction = 0;
  size_t decay_passes = 0;     // line extensions decaying on both sides
  std::vector<PalindromeVerdict> verdicts;
};

// Singular-continuous-regime diagnostic (requires ln lambda < delta_hat of
// params.theta): for each resonance k_i, sample box eigenvectors of the box
// of half-width n_half centered at the fold point k_i/2, run palindrome_test
// per (eigenvector, resonance) pair, and extend each eigenvector as a line
// solution by n_half beyond the box to test for two-sided exponential decay
// (slope <= -0.2 on the extensions); true decay should never occur here.
TransportReport sc_transport_check(const OperatorParams& params, long long n_half,
                                   int max_vectors = 40);

}  // namespace amo

#endif
