#ifndef AMO_PROFILE_HPP
#define AMO_PROFILE_HPP

#include <vector>

#include "amo/numeric.hpp"

namespace amo {

// Dirichlet box restriction to sites [a, b]: phi(a-1) = phi(b+1) = 0.
struct BoxSpec {
  long long a = 0;
  long long b = 0;
};

// Eigenfunction / solution data over a site window, magnitudes in log form.
// logU is log||U(l)|| with U(l) = (phi(l), phi(l-1)), normalized so that
// logU(anchor) = 0 at the global maximum.
struct SolutionProfile {
  long long n_lo = 0;
  long long n_hi = -1;
  std::vector<int> sign;
  std::vector<double> logmag_phi;  // nats
  std::vector<double> logU;        // nats
  long long anchor = 0;
  Real energy = Real(0);
  double residual = 0;  // max per-site relative defect of (H - E)phi
  bool degenerate_flag = false;

  size_t idx(long long l) const {
    if (l < n_lo || l > n_hi) throw std::out_of_range("profile site out of window");
    return static_cast<size_t>(l - n_lo);
  }
  double phi_log(long long l) const { return logmag_phi[idx(l)]; }
  double u_log(long long l) const { return logU[idx(l)]; }
  int phi_sign(long long l) const { return sign[idx(l)]; }
  long long size() const { return n_hi - n_lo + 1; }
};

}  // namespace amo

#endif
