#include "amo/sctest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace amo {

namespace {

SignLog sl_mul(const SignLog& a, const SignLog& b) {
  SignLog r;
  r.sign = a.sign * b.sign;
  r.log = r.sign == 0 ? neg_inf : a.log + b.log;
  return r;
}

SignLog sl_sub(const SignLog& a, const SignLog& b) {
  if (b.sign == 0) return a;
  if (a.sign == 0) return SignLog{-b.sign, b.log};
  if (a.sign != b.sign) return SignLog{a.sign, log_sum_exp(a.log, b.log)};
  if (a.log == b.log) return SignLog{0, neg_inf};
  bool a_bigger = a.log > b.log;
  double hi = a_bigger ? a.log : b.log;
  double lo = a_bigger ? b.log : a.log;
  return SignLog{a_bigger ? a.sign : -a.sign,
                 hi + std::log1p(-std::exp(lo - hi))};
}

}  // namespace

std::vector<SignLog> wronskian_profile(const std::vector<SignLog>& u,
                                       const std::vector<SignLog>& v) {
  if (u.size() != v.size() || u.size() < 2)
    throw std::invalid_argument("wronskian needs aligned arrays of length >= 2");
  std::vector<SignLog> w;
  w.reserve(u.size() - 1);
  for (size_t n = 0; n + 1 < u.size(); ++n)
    w.push_back(sl_sub(sl_mul(u[n + 1], v[n]), sl_mul(u[n], v[n + 1])));
  return w;
}

PalindromeVerdict palindrome_test(const OperatorParams& params,
                                  const SolutionProfile& eigvec, long long k_i,
                                  double delta, double eps) {
  long long need_lo = std::min<long long>(0, k_i) - 10;
  long long need_hi = std::max<long long>(0, k_i) + 10;
  if (eigvec.n_lo > need_lo || eigvec.n_hi < need_hi)
    throw std::invalid_argument("eigenvector window does not cover the reflection");

  PalindromeVerdict verdict;
  verdict.k_i = k_i;
  verdict.anchor = eigvec.anchor;

  // overlap of the window with its reflection through k_i/2
  long long ov_lo = std::max(eigvec.n_lo, k_i - eigvec.n_hi);
  long long ov_hi = std::min(eigvec.n_hi, k_i - eigvec.n_lo);

  double lambda = std::exp(params.ln_lambda);
  for (long long n = ov_lo; n <= ov_hi; ++n) {
    double d = std::fabs((params.site_term(n) - params.site_term(k_i - n))
                             .convert_to<double>());
    verdict.potential_defect = std::max(verdict.potential_defect, d);
  }
  verdict.predicted_bound =
      8.0 * M_PI * lambda * std::exp(-(delta - eps) * std::fabs(double(k_i)));
  if (verdict.potential_defect > verdict.predicted_bound)
    throw NotAResonanceError("potential mismatch exceeds the resonance bound");

  // l2-normalize over the reflection-symmetric overlap
  double max_log = neg_inf;
  for (long long n = ov_lo; n <= ov_hi; ++n)
    max_log = std::max(max_log, eigvec.phi_log(n));
  double sumsq = 0;
  for (long long n = ov_lo; n <= ov_hi; ++n)
    sumsq += std::exp(2.0 * (eigvec.phi_log(n) - max_log));
  double lognorm = max_log + 0.5 * std::log(sumsq);
  auto val = [&](long long n) {
    return eigvec.phi_sign(n) * std::exp(eigvec.phi_log(n) - lognorm);
  };
  auto sl = [&](long long n) {
    return SignLog{eigvec.phi_sign(n), eigvec.phi_log(n) - lognorm};
  };

  std::vector<SignLog> u, ui;
  for (long long n = ov_lo; n <= ov_hi; ++n) {
    u.push_back(sl(n));
    ui.push_back(sl(k_i - n));
  }
  for (const SignLog& w : wronskian_profile(u, ui))
    verdict.wronskian_sup =
        std::max(verdict.wronskian_sup, std::exp(w.log));

  // parity-split midpoint: Phi and its mirror at the fold
  long long m = k_i >= 0 ? k_i / 2 : -((-k_i + 1) / 2);
  double p0, p1, q0, q1;
  if (k_i % 2 == 0) {
    p0 = val(m), p1 = val(m - 1);
    q0 = val(m), q1 = val(m + 1);
  } else {
    p0 = val(m + 1), p1 = val(m);
    q0 = val(m), q1 = val(m + 1);
  }
  double n_sum = std::hypot(p0 + q0, p1 + q1);
  double n_diff = std::hypot(p0 - q0, p1 - q1);
  verdict.branch =
      n_sum < n_diff ? MidpointBranch::sum : MidpointBranch::difference;
  verdict.midpoint_norm = std::min(n_sum, n_diff);

  verdict.phi0_norm = std::hypot(val(0), val(-1));
  verdict.transport_gap =
      std::fabs(verdict.phi0_norm - std::hypot(val(k_i + 1), val(k_i)));
  return verdict;
}

TransportReport sc_transport_check(const OperatorParams& params, long long n_half,
                                   int max_vectors) {
  const Phase& theta = params.theta;
  if (theta.resonances.entries.empty())
    throw NotAResonanceError("no resonances to fold over");
  double dh = theta.delta_hat;
  if (params.ln_lambda >= dh)
    throw InvalidRegimeError("requires ln lambda < delta_hat");

  TransportReport rep;
  double lambda = std::exp(params.ln_lambda);
  Real e_lo(-2.0 - 2.0 * lambda - 0.5), e_hi(2.0 + 2.0 * lambda + 0.5);
  Real tol = pow(Real(2), -static_cast<long long>(precision_bits()) + 56);

  for (const ResonanceEntry& entry : theta.resonances.entries) {
    long long k = entry.k;
    long long c = k / 2;
    if (n_half < std::llabs(k) / 2 + 20)
      throw std::invalid_argument("box too small for this resonance");
    BoxSpec box{c - n_half, c + n_half};
    long long dim = 2 * n_half + 1;

    std::set<long long> indices;
    for (int i = 0; i < max_vectors; ++i)
      indices.insert((2 * static_cast<long long>(i) + 1) * dim /
                     (2 * static_cast<long long>(max_vectors)));
    for (long long j : indices) {
      Real E = eigenvalue_by_index(params, box, j, e_lo, e_hi, tol);
      SolutionProfile profile;
      try {
        profile = eigenvector_profile(params, box, E);
      } catch (const IllConditionedEigenpairError&) {
        continue;
      }
      ++rep.vectors;

      PalindromeVerdict verdict;
      try {
        verdict = palindrome_test(params, profile, k, dh, 0.1);
      } catch (const NotAResonanceError&) {
        continue;
      }
      rep.verdicts.push_back(verdict);
      // beyond |k|/2 from the fold the tunneling splitting drops below the
      // potential defect and the doublets localize on one side
      if (std::llabs(profile.anchor - c) <= std::llabs(k) / 2) {
        ++rep.near_pairs;
        if (verdict.transport_gap <= 0.2 * verdict.phi0_norm)
          ++rep.symmetric_pairs;
      }

      // line extension beyond the box: does the eigenvector keep decaying?
      OperatorParams shifted = params;
      shifted.theta.value =
          frac(params.theta.value + Rational(profile.anchor) * params.alpha.value);
      shifted.energy = E;
      LogVec2 u0;
      u0.v[0] = Real(profile.phi_sign(profile.anchor)) *
                exp(Real(profile.phi_log(profile.anchor)));
      u0.v[1] = Real(profile.phi_sign(profile.anchor - 1)) *
                exp(Real(profile.phi_log(profile.anchor - 1)));
      u0.renormalize();
      SolutionProfile ext = solution_profile(shifted, u0, 2 * n_half);
      double right = (ext.u_log(2 * n_half) - ext.u_log(n_half)) /
                     static_cast<double>(n_half);
      double left = (ext.u_log(-2 * n_half) - ext.u_log(-n_half)) /
                    static_cast<double>(n_half);
      if (right <= -0.2 && left <= -0.2) ++rep.decay_passes;
    }
  }
  rep.symmetric_fraction =
      rep.near_pairs == 0
          ? 0.0
          : static_cast<double>(rep.symmetric_pairs) /
                static_cast<double>(rep.near_pairs);
  return rep;
}

}  // namespace amo
