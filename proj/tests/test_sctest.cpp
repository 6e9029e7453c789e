#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "amo/sctest.hpp"
#include "support.hpp"

using namespace amo;
using amo::testsupport::golden;

namespace {

std::vector<SignLog> to_signlog(const SolutionProfile& pr) {
  std::vector<SignLog> out;
  for (long long n = pr.n_lo; n <= pr.n_hi; ++n)
    out.push_back({pr.phi_sign(n), pr.phi_log(n)});
  return out;
}

}  // namespace

TEST_CASE("wronskian: identical inputs vanish; preconditions") {
  std::vector<SignLog> u = {{1, 0.0}, {-1, -1.0}, {1, -2.5}, {1, 0.3}};
  for (const SignLog& w : wronskian_profile(u, u)) {
    CHECK(w.sign == 0);
    CHECK(w.log == neg_inf);
  }
  std::vector<SignLog> short_v = {{1, 0.0}};
  CHECK_THROWS_AS(wronskian_profile(u, short_v), std::invalid_argument);
  CHECK_THROWS_AS(wronskian_profile(short_v, short_v), std::invalid_argument);
}

TEST_CASE("wronskian: constant for two solutions at the same energy") {
  OperatorParams p;
  p.alpha = golden();
  p.theta.value = Rational(3, 11);
  p.ln_lambda = 0.4;
  p.energy = Real(0.5);
  LogVec2 a, b;
  a.v[0] = Real(1);
  a.v[1] = Real(0);
  b.v[0] = Real(0);
  b.v[1] = Real(1);
  // keep 2 L N well inside double-log resolution: the Wronskian is O(1)
  // while the products grow like e^{2L|n|}
  auto ua = solution_profile(p, a, 15);
  auto ub = solution_profile(p, b, 15);
  auto w = wronskian_profile(to_signlog(ua), to_signlog(ub));
  double w_lo = 1e300, w_hi = -1e300;
  for (const SignLog& x : w) {
    REQUIRE(x.sign != 0);
    CHECK(x.sign == w.front().sign);
    w_lo = std::min(w_lo, x.log);
    w_hi = std::max(w_hi, x.log);
  }
  CHECK(w_hi - w_lo <= 1e-6);
}

TEST_CASE("wronskian telescoping bound against the potential defect") {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.5, {20});
  p.ln_lambda = 0.3;
  p.energy = Real(1.0);
  LogVec2 a;
  a.v[0] = Real(1);
  a.v[1] = Real(0.3);
  auto upr = solution_profile(p, a, 40);
  double mx = -1e300;
  for (long long n = -20; n <= 40; ++n) mx = std::max(mx, upr.phi_log(n));
  auto u = [&](long long n) {
    return upr.phi_sign(n) * std::exp(upr.phi_log(n) - mx);
  };
  auto ui = [&](long long n) { return u(20 - n); };
  auto W = [&](long long n) { return u(n + 1) * ui(n) - u(n) * ui(n + 1); };
  long long n0 = -10, m = 30;
  double rhs = 0;
  for (long long j = n0; j <= n0 + m - 1; ++j) {
    double dv = std::fabs(
        (p.site_term(j) - p.site_term(20 - j)).convert_to<double>());
    rhs += dv * std::fabs(u(j) * ui(j));
  }
  CHECK(std::fabs(W(n0 + m - 1) - W(n0 - 1)) <= rhs + 1e-14);
}

TEST_CASE("palindrome: exactly symmetric potential and eigenvector") {
  OperatorParams p;
  p.alpha = golden();
  p.theta.value = frac(-2 * p.alpha.value);  // 2 theta + 4 alpha = 0 exactly
  p.ln_lambda = 0.5;
  BoxSpec box{2 - 12, 2 + 12};
  auto evs = box_eigenvalues(p, box, Real(-10), Real(10), pow(Real(2), -150));
  REQUIRE(!evs.empty());
  auto prof = eigenvector_profile(p, box, evs.back());
  auto verdict = palindrome_test(p, prof, 4, 0.5, 0.1);
  CHECK(verdict.potential_defect <= 1e-50);
  CHECK(verdict.wronskian_sup <= 1e-8);
  CHECK(verdict.transport_gap <= 1e-8);
  CHECK(verdict.midpoint_norm <= 1e-8);
}

TEST_CASE("palindrome: random vector violates the Wronskian bound") {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.5, {20});
  p.ln_lambda = 0.3;
  SolutionProfile pr;
  pr.n_lo = -30;
  pr.n_hi = 50;
  pr.anchor = 0;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  for (long long n = pr.n_lo; n <= pr.n_hi; ++n) {
    pr.sign.push_back(rng() % 2 ? 1 : -1);
    pr.logmag_phi.push_back(mag(rng));
    pr.logU.push_back(0.0);
  }
  auto verdict = palindrome_test(p, pr, 20, 0.5, 0.05);
  CHECK(verdict.wronskian_sup > verdict.predicted_bound);
  // an offset that is no resonance fails the potential-defect gate
  CHECK_THROWS_AS(palindrome_test(p, pr, 13, 0.5, 0.05), NotAResonanceError);
}

TEST_CASE("sc transport: regime guard") {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.5, {20});
  p.ln_lambda = 1.0;  // localized regime: ln lambda > delta_hat
  CHECK_THROWS_AS(sc_transport_check(p, 60, 8), InvalidRegimeError);
  p.theta = construct_phase(p.alpha, 0.5, {});
  p.ln_lambda = 0.1;
  CHECK_THROWS_AS(sc_transport_check(p, 60, 8), NotAResonanceError);
}

TEST_CASE("sc transport: folded box eigenvectors carry mass across the fold") {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.6, {20});
  p.ln_lambda = 0.3;
  REQUIRE(p.ln_lambda < p.theta.delta_hat);
  auto rep = sc_transport_check(p, 60, 32);
  CHECK(rep.vectors >= 20);
  CHECK(rep.near_pairs >= 3);
  CHECK(rep.symmetric_fraction >= 0.8);
  CHECK(rep.decay_passes == 0);
}
