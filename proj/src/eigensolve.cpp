#include "amo/eigensolve.hpp"

#include <algorithm>
#include <cmath>

namespace amo {

namespace {

double log_real(const Real& x) {
  if (x == 0) return neg_inf;
  return log(abs(x)).convert_to<double>();
}

std::vector<Real> box_diag(const OperatorParams& params, const BoxSpec& box) {
  if (box.b < box.a) throw std::invalid_argument("box: b < a");
  std::vector<Real> diag;
  diag.reserve(static_cast<size_t>(box.b - box.a + 1));
  for (long long n = box.a; n <= box.b; ++n) diag.push_back(params.site_term(n));
  return diag;
}

long long count_below(const std::vector<Real>& diag, const Real& E) {
  // Inertia of H - E via the LDL^T pivot recursion d_i = (v_i - E) - 1/d_{i-1}.
  long long neg = 0;
  Real d(1);
  bool first = true;
  const Real tiny = pow(Real(2), -2 * static_cast<int>(precision_bits()));
  for (const Real& v : diag) {
    d = first ? v - E : v - E - 1 / d;
    first = false;
    if (d == 0) d = tiny;
    if (d < 0) ++neg;
  }
  return neg;
}

}  // namespace

long long sturm_count(const OperatorParams& params, const BoxSpec& box, const Real& E) {
  return count_below(box_diag(params, box), E);
}

Real eigenvalue_by_index(const OperatorParams& params, const BoxSpec& box,
                         long long j, const Real& e_lo, const Real& e_hi,
                         const Real& tol) {
  auto diag = box_diag(params, box);
  Real lo = e_lo, hi = e_hi;
  while (hi - lo > tol) {
    Real mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;  // precision exhausted
    (count_below(diag, mid) <= j ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

std::vector<Real> box_eigenvalues(const OperatorParams& params, const BoxSpec& box,
                                  const Real& e_lo, const Real& e_hi, const Real& tol) {
  if (!(e_lo < e_hi)) throw std::invalid_argument("box_eigenvalues: degenerate window");
  Real tol_floor = pow(Real(2), 8 - static_cast<int>(precision_bits()));
  if (tol < tol_floor) throw std::invalid_argument("box_eigenvalues: tol below precision floor");

  auto diag = box_diag(params, box);
  long long c_lo = count_below(diag, e_lo);
  long long c_hi = count_below(diag, e_hi);
  std::vector<Real> out;
  for (long long j = c_lo + 1; j <= c_hi; ++j) {
    Real lo = e_lo, hi = e_hi;
    while (hi - lo > tol) {
      Real mid = (lo + hi) / 2;
      if (mid <= lo || mid >= hi) break;  // precision exhausted
      (count_below(diag, mid) >= j ? hi : lo) = mid;
    }
    out.push_back((lo + hi) / 2);
  }
  return out;
}

namespace {

struct Sweep {
  std::vector<int> sign;     // indexed by site - a
  std::vector<double> logm;  // nats
};

// phi(a-1) = 0, phi(a) = 1, recursion upward; records sites a..b.
Sweep shoot_left(const std::vector<Real>& diag, const Real& E, long long a, long long b) {
  Sweep s;
  size_t n = static_cast<size_t>(b - a + 1);
  s.sign.resize(n);
  s.logm.resize(n);
  Real prev(0), cur(1);
  double offset = 0;
  const Real big = pow(Real(2), 64);
  for (size_t i = 0; i < n; ++i) {
    s.sign[i] = cur == 0 ? 0 : (cur > 0 ? 1 : -1);
    s.logm[i] = cur == 0 ? neg_inf : log_real(cur) + offset;
    Real next = (E - diag[i]) * cur - prev;
    prev = cur;
    cur = next;
    Real mag = std::max(abs(prev), abs(cur));
    if (mag > big) {
      prev /= mag;
      cur /= mag;
      offset += log_real(mag);
    }
  }
  return s;
}

// phi(b+1) = 0, phi(b) = 1, recursion downward; records sites a..b.
Sweep shoot_right(const std::vector<Real>& diag, const Real& E, long long a, long long b) {
  Sweep s;
  size_t n = static_cast<size_t>(b - a + 1);
  s.sign.resize(n);
  s.logm.resize(n);
  Real prev(0), cur(1);
  double offset = 0;
  const Real big = pow(Real(2), 64);
  for (size_t i = n; i-- > 0;) {
    s.sign[i] = cur == 0 ? 0 : (cur > 0 ? 1 : -1);
    s.logm[i] = cur == 0 ? neg_inf : log_real(cur) + offset;
    Real next = (E - diag[i]) * cur - prev;
    prev = cur;
    cur = next;
    Real mag = std::max(abs(prev), abs(cur));
    if (mag > big) {
      prev /= mag;
      cur /= mag;
      offset += log_real(mag);
    }
  }
  return s;
}

struct GlueEval {
  Sweep left, right;
  size_t g = 0;        // glue index (site g + a), uses g and g+1
  double mismatch = 0; // |sin angle| between the two shooting directions
  int w_sign = 0;
};

GlueEval evaluate_glue(const std::vector<Real>& diag, const Real& E, long long a,
                       long long b) {
  GlueEval ev;
  ev.left = shoot_left(diag, E, a, b);
  ev.right = shoot_right(diag, E, a, b);
  size_t n = ev.left.logm.size();
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < n; ++i) {
    double s = ev.left.logm[i] + ev.right.logm[i];
    if (s > best) {
      best = s;
      ev.g = i;
    }
  }
  auto dir = [](const Sweep& sw, size_t i) {
    double m = std::max(sw.logm[i], sw.logm[i + 1]);
    double x = sw.sign[i] * std::exp(sw.logm[i] - m);
    double y = sw.sign[i + 1] * std::exp(sw.logm[i + 1] - m);
    double h = std::hypot(x, y);
    return std::pair<double, double>{x / h, y / h};
  };
  auto [lx, ly] = dir(ev.left, ev.g);
  auto [rx, ry] = dir(ev.right, ev.g);
  double w = lx * ry - ly * rx;
  ev.mismatch = std::fabs(w);
  ev.w_sign = w == 0 ? 0 : (w > 0 ? 1 : -1);
  return ev;
}

double log_hypot(double la, double lb) {
  if (la == neg_inf) return lb;
  if (lb == neg_inf) return la;
  double m = std::max(la, lb);
  return m + 0.5 * std::log1p(std::exp(2 * (std::min(la, lb) - m)));
}

// residual at interior sites from sign/log data; logs must be mutually scaled.
double profile_residual(const SolutionProfile& pr, const std::vector<Real>& diag,
                        const Real& E) {
  double worst = 0;
  for (long long l = pr.n_lo + 1; l < pr.n_hi; ++l) {
    size_t i = pr.idx(l);
    double c = (diag[i] - E).convert_to<double>();
    double lc = c == 0 ? neg_inf : std::log(std::fabs(c));
    double m = std::max({pr.logmag_phi[i - 1], pr.logmag_phi[i + 1],
                         pr.logmag_phi[i] + lc});
    if (m == neg_inf) continue;
    double sum = pr.sign[i + 1] * std::exp(pr.logmag_phi[i + 1] - m) +
                 pr.sign[i - 1] * std::exp(pr.logmag_phi[i - 1] - m) +
                 (c == 0 ? 0.0 : (c > 0 ? 1 : -1) * pr.sign[i] *
                                     std::exp(pr.logmag_phi[i] + lc - m));
    worst = std::max(worst, std::fabs(sum));
  }
  return worst;
}

void finalize_profile(SolutionProfile& pr) {
  size_t n = pr.logmag_phi.size();
  pr.logU.resize(n);
  for (size_t i = 0; i < n; ++i)
    pr.logU[i] = log_hypot(pr.logmag_phi[i], i == 0 ? neg_inf : pr.logmag_phi[i - 1]);
  size_t amax = 0;
  for (size_t i = 1; i < n; ++i)
    if (pr.logU[i] > pr.logU[amax]) amax = i;
  pr.anchor = pr.n_lo + static_cast<long long>(amax);
  double shift = pr.logU[amax];
  for (size_t i = 0; i < n; ++i) {
    if (pr.logU[i] != neg_inf) pr.logU[i] -= shift;
    if (pr.logmag_phi[i] != neg_inf) pr.logmag_phi[i] -= shift;
  }
}

}  // namespace

SolutionProfile eigenvector_profile(const OperatorParams& params, const BoxSpec& box,
                                    const Real& E) {
  auto diag = box_diag(params, box);
  long long a = box.a, b = box.b;
  if (b - a < 2) throw std::invalid_argument("eigenvector_profile: box too small");

  GlueEval best = evaluate_glue(diag, E, a, b);
  Real e_best = E;

  if (best.mismatch > 1e-8) {
    // Bracket a sign change of the glue Wronskian around E, then bisect.
    Real h = pow(Real(2), 16 - static_cast<int>(precision_bits())) *
             std::max(Real(1), abs(E));
    GlueEval lo_ev, hi_ev;
    bool bracketed = false;
    for (int tries = 0; tries < 40 && h < Real(1e-3); ++tries, h *= 4) {
      lo_ev = evaluate_glue(diag, E - h, a, b);
      hi_ev = evaluate_glue(diag, E + h, a, b);
      if (lo_ev.w_sign != 0 && hi_ev.w_sign != 0 && lo_ev.w_sign != hi_ev.w_sign) {
        bracketed = true;
        break;
      }
    }
    if (bracketed) {
      Real lo = E - h, hi = E + h;
      int lo_sign = lo_ev.w_sign;
      Real width_floor = pow(Real(2), 8 - static_cast<int>(precision_bits()));
      while (hi - lo > width_floor) {
        Real mid = (lo + hi) / 2;
        if (mid <= lo || mid >= hi) break;  // precision exhausted
        GlueEval ev = evaluate_glue(diag, mid, a, b);
        if (ev.mismatch < best.mismatch) {
          best = ev;
          e_best = mid;
        }
        if (ev.mismatch <= 1e-10) break;
        if (ev.w_sign == lo_sign || ev.w_sign == 0)
          lo = mid;
        else
          hi = mid;
      }
    }
  }
  if (best.mismatch > 1e-6) throw IllConditionedEigenpairError(best.mismatch);

  SolutionProfile pr;
  pr.n_lo = a;
  pr.n_hi = b;
  pr.energy = e_best;
  size_t n = static_cast<size_t>(b - a + 1);
  pr.sign.resize(n);
  pr.logmag_phi.resize(n);
  size_t g = best.g;
  // Align the right sweep to the left one at the glue site.
  size_t ref = best.left.sign[g] != 0 && best.right.sign[g] != 0 ? g : g + 1;
  double off = best.left.logm[ref] - best.right.logm[ref];
  int flip = best.left.sign[ref] * best.right.sign[ref];
  if (flip == 0) throw IllConditionedEigenpairError(best.mismatch);
  for (size_t i = 0; i < n; ++i) {
    if (i <= g) {
      pr.sign[i] = best.left.sign[i];
      pr.logmag_phi[i] = best.left.logm[i];
    } else {
      pr.sign[i] = best.right.sign[i] * flip;
      pr.logmag_phi[i] = best.right.logm[i] == neg_inf ? neg_inf
                                                       : best.right.logm[i] + off;
    }
  }
  finalize_profile(pr);
  pr.residual = profile_residual(pr, diag, e_best);
  return pr;
}

SolutionProfile solution_profile(const OperatorParams& params, const LogVec2& u0,
                                 long long N) {
  if (N < 1) throw std::invalid_argument("solution_profile: N < 1");
  SolutionProfile pr;
  pr.n_lo = -N;
  pr.n_hi = N;
  pr.energy = params.energy;
  size_t n = static_cast<size_t>(2 * N + 1);
  pr.sign.assign(n, 0);
  pr.logmag_phi.assign(n, neg_inf);

  {
    // forward from (phi(0), phi(-1)) = u0, then backward from the same data
    const Real big = pow(Real(2), 64);
    auto record = [&](long long l, const Real& val, double offset) {
      size_t i = pr.idx(l);
      pr.sign[i] = val == 0 ? 0 : (val > 0 ? 1 : -1);
      pr.logmag_phi[i] = val == 0 ? neg_inf
                                  : log(abs(val)).convert_to<double>() + offset;
    };
    Real prev = u0.v[1], cur = u0.v[0];
    double offset = u0.log_scale;
    record(0, cur, offset);
    for (long long m = 0; m < N; ++m) {
      Real next = (params.energy - params.site_term(m)) * cur - prev;
      prev = cur;
      cur = next;
      Real mag = std::max(abs(prev), abs(cur));
      if (mag > big) {
        prev /= mag;
        cur /= mag;
        offset += log(mag).convert_to<double>();
      }
      record(m + 1, cur, offset);
    }
    prev = u0.v[0];
    cur = u0.v[1];
    offset = u0.log_scale;
    record(-1, cur, offset);
    for (long long m = -1; m > -N; --m) {
      Real next = (params.energy - params.site_term(m)) * cur - prev;
      prev = cur;
      cur = next;
      Real mag = std::max(abs(prev), abs(cur));
      if (mag > big) {
        prev /= mag;
        cur /= mag;
        offset += log(mag).convert_to<double>();
      }
      record(m - 1, cur, offset);
    }
  }

  finalize_profile(pr);
  std::vector<Real> diag;
  diag.reserve(n);
  for (long long l = -N; l <= N; ++l) diag.push_back(params.site_term(l));
  pr.residual = profile_residual(pr, diag, params.energy);
  return pr;
}

}  // namespace amo
