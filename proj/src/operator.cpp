#include "amo/operator.hpp"

#include <algorithm>
#include <cmath>

namespace amo {

namespace {

// Per-sweep evaluator: caches 2*lambda and the angle step so site terms cost
// one mpfr cos per cosine mode coefficient.
struct SiteEval {
  const OperatorParams& p;
  Real lambda;
  Real two_pi;

  explicit SiteEval(const OperatorParams& params)
      : p(params), lambda(exp(Real(params.ln_lambda))), two_pi(2 * pi_real()) {}

  Real operator()(long long n) const {
    if (p.cos_coeffs.empty()) return Real(0);
    Rational x = frac(p.theta.value + Rational(n) * p.alpha.value);
    Real v(0);
    Real xr(x);
    for (size_t j = 0; j < p.cos_coeffs.size(); ++j)
      v += Real(p.cos_coeffs[j]) * cos(two_pi * Real(static_cast<long long>(j + 1)) * xr);
    return lambda * v;
  }
};

double log_real(const Real& x) { return log(abs(x)).convert_to<double>(); }

}  // namespace

Real OperatorParams::site_term(long long n) const { return SiteEval(*this)(n); }

LogMat2 LogMat2::identity() {
  LogMat2 out;
  out.m[0][0] = 1; out.m[0][1] = 0;
  out.m[1][0] = 0; out.m[1][1] = 1;
  out.log_scale = 0;
  return out;
}

void LogMat2::renormalize() {
  Real s = abs(m[0][0]);
  s = std::max(s, abs(m[0][1]));
  s = std::max(s, abs(m[1][0]));
  s = std::max(s, abs(m[1][1]));
  if (s == 0) throw Error("LogMat2: zero matrix cannot be renormalized");
  // scale by an exact power of two: no rounding, no transcendental call
  long e = mpfr_get_exp(s.backend().data());
  for (auto& row : m)
    for (auto& x : row) x = ldexp(x, -e);
  log_scale += static_cast<double>(e) * M_LN2;
}

double LogMat2::log_frobenius() const {
  Real s = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
  return 0.5 * log_real(s) + log_scale;
}

LogMat2 matmul(const LogMat2& lhs, const LogMat2& rhs) {
  LogMat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.m[i][j] = lhs.m[i][0] * rhs.m[0][j] + lhs.m[i][1] * rhs.m[1][j];
  out.log_scale = lhs.log_scale + rhs.log_scale;
  out.renormalize();
  return out;
}

void LogVec2::renormalize() {
  Real s = std::max(abs(v[0]), abs(v[1]));
  if (s == 0) throw Error("LogVec2: zero vector cannot be renormalized");
  long e = mpfr_get_exp(s.backend().data());
  v[0] = ldexp(v[0], -e);
  v[1] = ldexp(v[1], -e);
  log_scale += static_cast<double>(e) * M_LN2;
}

double LogVec2::log_norm() const {
  return 0.5 * log_real(v[0] * v[0] + v[1] * v[1]) + log_scale;
}

LogVec2 apply(const LogMat2& mat, const LogVec2& vec) {
  LogVec2 out;
  out.v[0] = mat.m[0][0] * vec.v[0] + mat.m[0][1] * vec.v[1];
  out.v[1] = mat.m[1][0] * vec.v[0] + mat.m[1][1] * vec.v[1];
  out.log_scale = mat.log_scale + vec.log_scale;
  out.renormalize();
  return out;
}

namespace {

// acc <- A(site e) * acc with A = ((e, -1), (1, 0))
void step_forward(LogMat2& acc, const Real& e) {
  Real r0[2] = {acc.m[0][0], acc.m[0][1]};
  acc.m[0][0] = e * r0[0] - acc.m[1][0];
  acc.m[0][1] = e * r0[1] - acc.m[1][1];
  acc.m[1][0] = r0[0];
  acc.m[1][1] = r0[1];
  acc.renormalize();
}

// acc <- A(site e)^{-1} * acc with A^{-1} = ((0, 1), (-1, e))
void step_inverse(LogMat2& acc, const Real& e) {
  Real r0[2] = {acc.m[0][0], acc.m[0][1]};
  acc.m[0][0] = acc.m[1][0];
  acc.m[0][1] = acc.m[1][1];
  acc.m[1][0] = e * acc.m[0][0] - r0[0];
  acc.m[1][1] = e * acc.m[0][1] - r0[1];
  acc.renormalize();
}

}  // namespace

LogMat2 transfer_product(const OperatorParams& params, long long k, long long m) {
  SiteEval site(params);
  LogMat2 acc = LogMat2::identity();
  if (k >= 0) {
    for (long long j = 0; j < k; ++j)
      step_forward(acc, params.energy - site(m + j));
  } else {
    // A_{-K}(theta + m alpha) = A(.+(m-K)a)^{-1} ... A(.+(m-1)a)^{-1}
    long long K = -k;
    for (long long j = K - 1; j >= 0; --j)
      step_inverse(acc, params.energy - site(m - K + j));
  }
  return acc;
}

std::vector<double> transfer_norm_profile(const OperatorParams& params, long long n,
                                          long long m) {
  if (n < 1) throw std::invalid_argument("transfer_norm_profile: n < 1");
  SiteEval site(params);
  LogMat2 acc = LogMat2::identity();
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (long long j = 0; j < n; ++j) {
    step_forward(acc, params.energy - site(m + j));
    out.push_back(acc.log_frobenius());
  }
  return out;
}

std::vector<SignLog> determinant_logs(const OperatorParams& params, long long k_max,
                                      long long theta_shift) {
  if (k_max < 0) throw std::invalid_argument("determinant_logs: k_max < 0");
  SiteEval site(params);
  std::vector<SignLog> out;
  out.reserve(static_cast<size_t>(k_max) + 1);
  Real p_prev(0), p_cur(1);  // P_{-1}, P_0
  double offset = 0;
  out.push_back({1, 0.0});
  const Real big = pow(Real(2), 64);
  for (long long k = 1; k <= k_max; ++k) {
    Real p_next = (params.energy - site(theta_shift + k - 1)) * p_cur - p_prev;
    p_prev = p_cur;
    p_cur = p_next;
    Real mag = std::max(abs(p_prev), abs(p_cur));
    if (mag > big) {
      p_prev /= mag;
      p_cur /= mag;
      offset += log_real(mag);
    }
    if (p_cur == 0)
      out.push_back({0, neg_inf});
    else
      out.push_back({p_cur > 0 ? 1 : -1, log_real(p_cur) + offset});
  }
  return out;
}

SignLog green_entry(const OperatorParams& params, long long x1, long long x2,
                    long long y, GreenSide side) {
  if (x1 > y || y > x2) throw std::invalid_argument("green_entry: y outside [x1, x2]");
  long long k = x2 - x1 + 1;
  SignLog den = determinant_logs(params, k, x1).back();
  if (den.sign == 0) throw BoxSingularError();
  SignLog num;
  if (side == GreenSide::left)
    num = determinant_logs(params, x2 - y, y + 1).back();
  else
    num = determinant_logs(params, y - x1, x1).back();
  if (num.sign == 0) return {0, neg_inf};
  return {num.sign * den.sign, num.log - den.log};
}

RegularityWitness regularity_check(const OperatorParams& params, long long y,
                                   double tau, long long k) {
  if (tau <= 0) throw std::invalid_argument("regularity_check: tau <= 0");
  if (k < 40) throw std::invalid_argument("regularity_check: k < 40");
  double min_dist = static_cast<double>(k) / 40.0;
  for (long long x1 = y - k + 1; x1 <= y; ++x1) {
    long long x2 = x1 + k - 1;
    double d1 = static_cast<double>(y - x1);
    double d2 = static_cast<double>(x2 - y);
    if (d1 < min_dist || d2 < min_dist) continue;
    try {
      SignLog g1 = green_entry(params, x1, x2, y, GreenSide::left);
      if (!(g1.log < -tau * d1)) continue;
      SignLog g2 = green_entry(params, x1, x2, y, GreenSide::right);
      if (!(g2.log < -tau * d2)) continue;
      return {true, x1, x2};
    } catch (const BoxSingularError&) {
      continue;
    }
  }
  return {false, 0, 0};
}

UniformityReport uniformity_product(const std::vector<Rational>& theta_samples,
                                    int x_grid_size) {
  size_t n = theta_samples.size();
  if (n < 2) throw std::invalid_argument("uniformity_product: need >= 2 samples");
  if (x_grid_size < 1000) throw std::invalid_argument("uniformity_product: grid < 1000");

  std::vector<double> c(n);
  for (size_t i = 0; i < n; ++i)
    c[i] = std::cos(2.0 * M_PI * frac(theta_samples[i]).convert_to<double>());
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (std::fabs(c[i] - c[j]) <= 1e-12)
        throw DegenerateSetError("cos values coincide for samples " + std::to_string(i) +
                                 " and " + std::to_string(j));

  double k = static_cast<double>(n - 1);
  std::vector<double> denom(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j)
      if (j != i) denom[i] += std::log(std::fabs(c[i] - c[j]));
    denom[i] /= k;
  }
  auto f = [&](size_t i, double x) {
    double s = 0;
    for (size_t j = 0; j < n; ++j)
      if (j != i) s += std::log(std::fabs(x - c[j]));
    return s / k - denom[i];
  };

  // Chebyshev nodes include the endpoints and crowd toward them.
  int G = x_grid_size;
  UniformityReport rep;
  rep.eps1 = -std::numeric_limits<double>::infinity();
  int best_t = 0;
  for (size_t i = 0; i < n; ++i) {
    for (int t = 0; t < G; ++t) {
      double x = std::cos(M_PI * static_cast<double>(t) / static_cast<double>(G - 1));
      double v = f(i, x);
      if (v > rep.eps1) {
        rep.eps1 = v;
        rep.argmax_i = i;
        rep.argmax_x = x;
        best_t = t;
      }
    }
  }

  // Golden-section refinement inside the bracketing grid cells.
  double lo = std::cos(M_PI * std::min(best_t + 1, G - 1) / static_cast<double>(G - 1));
  double hi = std::cos(M_PI * std::max(best_t - 1, 0) / static_cast<double>(G - 1));
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(rep.argmax_i, x1), f2 = f(rep.argmax_i, x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = f(rep.argmax_i, x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = f(rep.argmax_i, x1);
    }
  }
  double xr = 0.5 * (a + b);
  double fr = f(rep.argmax_i, xr);
  if (fr > rep.eps1) {
    rep.eps1 = fr;
    rep.argmax_x = xr;
  }
  double lip = 0;
  for (size_t j = 0; j < n; ++j)
    if (j != rep.argmax_i)
      lip += 1.0 / std::max(std::fabs(rep.argmax_x - c[j]), 1e-300);
  rep.upper_gap = lip / k * (b - a);
  return rep;
}

BlockBoundReport block_bound_check(const OperatorParams& params,
                                   const SolutionProfile& profile, long long y1,
                                   long long y2, double tau, double gamma) {
  long long k = y2 - y1;
  if (k < 100) throw std::invalid_argument("block_bound_check: y2 - y1 < 100");
  if (tau <= 0 || gamma <= 0) throw std::invalid_argument("block_bound_check: tau, gamma > 0");
  double gk = gamma * static_cast<double>(k);
  long long radius = static_cast<long long>(std::floor(10.0 * gk));
  // The band is clamped so a regularity scale k1 >= 40 fits below half the
  // endpoint distance.
  long long band = std::max<long long>(static_cast<long long>(std::ceil(10.0 * gk)), 80);
  if (y1 - radius < profile.n_lo || y2 + radius > profile.n_hi)
    throw std::invalid_argument("block_bound_check: profile window too small");
  if (y1 + band > y2 - band)
    throw std::invalid_argument("block_bound_check: block too short for the band");

  auto r_log = [&](long long y) {
    double best = neg_inf;
    for (long long j = -radius; j <= radius; ++j)
      best = std::max(best, profile.phi_log(y + j));
    return best;
  };

  for (long long y = y1 + band; y <= y2 - band; ++y) {
    long long mind = std::min(y - y1, y2 - y);
    long long k1 = std::clamp<long long>(mind / 2, 40, 100);
    auto reg = regularity_check(params, y, tau, k1);
    if (!reg.is_regular)
      throw UnverifiedHypothesisError("regularity not established at site " +
                                      std::to_string(y));
  }

  BlockBoundReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  // endpoint reference values are smeared over +-10 gamma k; interior sites
  // enter pointwise
  double r1 = r_log(y1), r2 = r_log(y2);
  for (long long y = y1 + band; y <= y2 - band; ++y) {
    double rhs = std::max(r1 - tau * (static_cast<double>(y - y1) - 3.0 * gk),
                          r2 - tau * (static_cast<double>(y2 - y) - 3.0 * gk));
    rep.margin = std::min(rep.margin, rhs - profile.phi_log(y));
  }
  rep.holds = rep.margin >= 0;
  return rep;
}

}  // namespace amo
