#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "support.hpp"

using namespace amo;
using amo::testsupport::golden;

namespace {

OperatorParams basic_params(double ln_lambda = 0.3) {
  OperatorParams p;
  p.alpha = golden();
  p.theta.value = Rational(1, 8);
  p.ln_lambda = ln_lambda;
  p.energy = Real(1) / 3;
  return p;
}

double site_oracle(const OperatorParams& p, long long n) {
  double th = frac(p.theta.value + Rational(n) * p.alpha.value).convert_to<double>();
  return 2.0 * std::exp(p.ln_lambda) * std::cos(2.0 * M_PI * th);
}

// dense tridiagonal of the box restriction
Eigen::MatrixXd dense_box(const OperatorParams& p, long long a, long long b) {
  long long n = b - a + 1;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (long long i = 0; i < n; ++i) {
    H(i, i) = p.site_term(a + i).convert_to<double>();
    if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = 1.0;
  }
  return H;
}

}  // namespace

TEST_CASE("potential: worked examples") {
  OperatorParams p;
  p.alpha = golden();
  p.theta.value = Rational(0);
  p.ln_lambda = 1.0;
  CHECK(p.site_term(0).convert_to<double>() ==
        doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));

  p.theta.value = Rational(1, 4);
  CHECK(std::fabs(p.site_term(0).convert_to<double>()) <= 1e-60);

  p.theta.value = Rational(1, 8);
  p.alpha = Frequency::from_rational(Rational(3, 7));
  p.ln_lambda = 0.25;
  CHECK(p.site_term(1).convert_to<double>() ==
        doctest::Approx(site_oracle(p, 1)).epsilon(1e-12));

  p.cos_coeffs.clear();
  CHECK(p.site_term(5) == 0);
}

TEST_CASE("transfer: identity, one step, inverse convention") {
  OperatorParams p = basic_params();
  auto id = transfer_product(p, 0);
  CHECK(id.log_scale == 0.0);
  CHECK(id.m[0][0] == 1);
  CHECK(id.m[1][1] == 1);

  p.theta.value = Rational(0);
  p.energy = Real(2);
  auto a1 = transfer_product(p, 1);
  double scale = std::exp(a1.log_scale);
  double e_minus_v = (p.energy - p.site_term(0)).convert_to<double>();
  CHECK(a1.m[0][0].convert_to<double>() * scale == doctest::Approx(e_minus_v).epsilon(1e-12));
  CHECK(a1.m[0][1].convert_to<double>() * scale == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(a1.m[1][0].convert_to<double>() * scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(a1.m[1][1].convert_to<double>()) * scale <= 1e-70);

  p = basic_params();
  auto fwd = transfer_product(p, 5, -5);
  auto inv = transfer_product(p, -5, 0);
  auto prod = matmul(inv, fwd);
  CHECK(std::fabs(prod.log_scale + std::log(std::fabs(prod.m[0][0].convert_to<double>()))) <= 1e-8);
  CHECK(prod.m[0][0].convert_to<double>() == doctest::Approx(prod.m[1][1].convert_to<double>()).epsilon(1e-10));
  CHECK(std::fabs(prod.m[0][1].convert_to<double>() / prod.m[0][0].convert_to<double>()) <= 1e-8);
  CHECK(std::fabs(prod.m[1][0].convert_to<double>() / prod.m[0][0].convert_to<double>()) <= 1e-8);
}

TEST_CASE("transfer: cocycle property and unimodularity") {
  // mixed-sign k1, k2 cancel up to e^{(|k1|+|k2|+|k1+k2|) L} in the product:
  // the 1e-8 comparison needs headroom far beyond the default 256 bits
  set_precision_bits(2048);
  OperatorParams p = basic_params(0.7);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    long long k1 = static_cast<long long>(rng() % 1000) - 500;
    long long k2 = static_cast<long long>(rng() % 1000) - 500;
    long long m = static_cast<long long>(rng() % 100) - 50;
    auto whole = transfer_product(p, k1 + k2, m);
    auto part = matmul(transfer_product(p, k1, m + k2), transfer_product(p, k2, m));
    // compare in log scale entrywise relative to the larger magnitude
    double ref = whole.log_frobenius();
    CHECK(part.log_frobenius() == doctest::Approx(ref).epsilon(1e-8));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double a = whole.m[i][j].convert_to<double>() *
                   std::exp(whole.log_scale - ref);
        double b = part.m[i][j].convert_to<double>() *
                   std::exp(part.log_scale - ref);
        CHECK(a == doctest::Approx(b).epsilon(1e-7));
      }
    Real det = whole.m[0][0] * whole.m[1][1] - whole.m[0][1] * whole.m[1][0];
    CHECK(std::fabs(2.0 * whole.log_scale + log(abs(det)).convert_to<double>()) <= 1e-8);
  }
  set_precision_bits(256);
}

TEST_CASE("determinants: base cases and dense oracle") {
  OperatorParams p = basic_params();
  auto P = determinant_logs(p, 2);
  CHECK(P[0].sign == 1);
  CHECK(P[0].log == 0.0);
  double p1 = (p.energy - p.site_term(0)).convert_to<double>();
  CHECK(P[1].signed_value() == doctest::Approx(p1).epsilon(1e-12));

  Eigen::MatrixXd H = dense_box(p, 0, 1);
  Eigen::MatrixXd M = Real(p.energy).convert_to<double>() * Eigen::MatrixXd::Identity(2, 2) - H;
  CHECK(P[2].signed_value() == doctest::Approx(M.determinant()).epsilon(1e-10));
}

TEST_CASE("determinants: transfer-matrix entry consistency") {
  OperatorParams p = basic_params(0.9);
  for (long long k : {3LL, 17LL, 120LL}) {
    auto A = transfer_product(p, k);
    auto P0 = determinant_logs(p, k, 0);
    auto P1 = determinant_logs(p, k, 1);
    // first column of A_k is (P_k, P_{k-1}) at shift 0; second column is
    // -(P_{k-1}, P_{k-2}) at shift 1
    struct Want { int i, j; SignLog v; int flip; };
    Want want[] = {{0, 0, P0[k], 1},
                   {1, 0, P0[k - 1], 1},
                   {0, 1, P1[k - 1], -1},
                   {1, 1, P1[k - 2], -1}};
    for (const auto& w : want) {
      const Real& entry = A.m[w.i][w.j];
      double got_log = std::log(std::fabs(entry.convert_to<double>())) + A.log_scale;
      int got_sign = entry > 0 ? 1 : -1;
      CHECK(got_log == doctest::Approx(w.v.log).epsilon(1e-8));
      CHECK(got_sign == w.flip * w.v.sign);
    }
  }
}

TEST_CASE("green entries: scalar box, dense oracle, boundary case") {
  OperatorParams p = basic_params();
  auto g = green_entry(p, 7, 7, 7, GreenSide::left);
  double direct = 1.0 / std::fabs((p.energy - p.site_term(7)).convert_to<double>());
  CHECK(std::exp(g.log) == doctest::Approx(direct).epsilon(1e-10));

  long long a = -2, b = 2;
  Eigen::MatrixXd M = dense_box(p, a, b) -
                      p.energy.convert_to<double>() * Eigen::MatrixXd::Identity(5, 5);
  Eigen::MatrixXd G = M.inverse();
  for (long long y = a; y <= b; ++y) {
    auto gl = green_entry(p, a, b, y, GreenSide::left);
    auto gr = green_entry(p, a, b, y, GreenSide::right);
    CHECK(gl.log == doctest::Approx(std::log(std::fabs(G(0, y - a)))).epsilon(1e-8));
    CHECK(gr.log == doctest::Approx(std::log(std::fabs(G(y - a, 4)))).epsilon(1e-8));
  }

  auto gb = green_entry(p, a, b, b, GreenSide::right);
  auto P = determinant_logs(p, 5, a);
  CHECK(gb.log == doctest::Approx(P[4].log - P[5].log).epsilon(1e-10));
}

TEST_CASE("transfer norm profile matches one-off products") {
  OperatorParams p = basic_params(0.5);
  auto prof = transfer_norm_profile(p, 40, 3);
  for (long long k : {1LL, 7LL, 40LL})
    CHECK(prof[k - 1] == doctest::Approx(transfer_product(p, k, 3).log_frobenius()).epsilon(1e-10));
}

TEST_CASE("regularity: preconditions") {
  OperatorParams p = basic_params();
  CHECK_THROWS_AS(regularity_check(p, 0, 0.5, 10), std::invalid_argument);
  CHECK_THROWS_AS(regularity_check(p, 0, -1.0, 80), std::invalid_argument);
}

TEST_CASE("regularity: localized regime, far site regular, center singular") {
  OperatorParams p = amo::testsupport::localized_params();
  BoxSpec box{-200, 200};
  SolutionProfile pr;
  p.energy = amo::testsupport::centered_eigenvalue(p, box, 0.1, 0.7, 60, &pr);

  long long y_far = pr.anchor + 120;
  auto far = regularity_check(p, y_far, 0.8, 80);
  CHECK(far.is_regular);
  CHECK(far.x1 <= y_far);
  CHECK(y_far <= far.x2);

  auto center = regularity_check(p, pr.anchor, 1.0 - 0.05, 80);
  CHECK_FALSE(center.is_regular);
}

TEST_CASE("regularity: resonant reflection site is singular") {
  OperatorParams p;
  p.alpha = golden();
  p.theta = construct_phase(p.alpha, 0.5, {20});
  p.ln_lambda = 1.0;
  BoxSpec box{-200, 200};
  SolutionProfile pr;
  p.energy = amo::testsupport::centered_eigenvalue(p, box, 0.1, 0.7, 60, &pr);
  auto x0 = locate_x0_eta(p.alpha, p.theta, 20);
  REQUIRE(x0.x0 == 20);
  // the potential is nearly reflection-symmetric about x0/2, so the
  // eigenfunction has a mirror peak at x0 - k0 and the Green function is
  // singular there
  auto res = regularity_check(p, x0.x0 - pr.anchor, 1.0 - 0.05, 80);
  CHECK_FALSE(res.is_regular);
}

TEST_CASE("uniformity: two-point closed form and degenerate input") {
  // cos 2 pi /3 = -1/2, cos 2 pi /6 = 1/2: max over [-1,1] is ln(3/2) at x = +-1
  auto rep = uniformity_product({Rational(1, 3), Rational(1, 6)}, 1201);
  CHECK(rep.eps1 == doctest::Approx(std::log(1.5)).epsilon(1e-6));
  CHECK(std::fabs(std::fabs(rep.argmax_x) - 1.0) <= 1e-6);

  CHECK_THROWS_AS(uniformity_product({Rational(1, 5), Rational(4, 5)}, 1201),
                  DegenerateSetError);
  CHECK_THROWS_AS(uniformity_product({Rational(1, 3), Rational(1, 6)}, 999),
                  std::invalid_argument);
}

TEST_CASE("uniformity: orbit samples, non-resonant vs resonant phase") {
  // consecutive orbit points theta + j alpha, j = 0..count-1
  auto orbit = [](const Phase& th, int count) {
    std::vector<Rational> s;
    for (int j = 0; j < count; ++j)
      s.push_back(frac(th.value + Rational(j) * golden().value));
    return s;
  };
  Phase flat = construct_phase(golden(), 0.5, {});
  auto rep_flat = uniformity_product(orbit(flat, 34), 2000);
  CHECK(rep_flat.eps1 <= 0.2);

  // q_n = 21 samples spanning the k = 20 resonance: the pairs i + j = 20
  // nearly coincide under cos, which costs ~ gamma in the denominators
  Phase res = construct_phase(golden(), 0.5, {20});
  auto rep_res = uniformity_product(orbit(res, 21), 2000);
  CHECK(rep_res.eps1 >= 0.3);
  CHECK(rep_res.eps1 <= 0.7);
}

TEST_CASE("block bound: synthetic profiles and localized eigenvector") {
  OperatorParams p = amo::testsupport::localized_params();
  BoxSpec box{-300, 300};
  SolutionProfile pr;
  p.energy = amo::testsupport::centered_eigenvalue(p, box, 0.2, 0.8, 60, &pr);
  long long y1 = pr.anchor + 60, y2 = pr.anchor + 260;
  double tau = 1.0 - 0.1, gamma = 0.01;

  // pure two-sided exponential: loose by construction
  SolutionProfile synth;
  synth.n_lo = box.a;
  synth.n_hi = box.b;
  long long n = synth.size();
  synth.sign.assign(n, 1);
  synth.logmag_phi.resize(n);
  for (long long l = synth.n_lo; l <= synth.n_hi; ++l)
    synth.logmag_phi[synth.idx(l)] =
        -tau * std::min(std::llabs(l - y1), std::llabs(y2 - l));
  synth.logU = synth.logmag_phi;
  auto rep = block_bound_check(p, synth, y1, y2, tau, gamma);
  CHECK(rep.holds);
  CHECK(rep.margin >= 3.0 * gamma * 200.0 * tau - 1e-9);

  // interior spike above both endpoints: must fail
  SolutionProfile spike = synth;
  spike.logmag_phi[spike.idx((y1 + y2) / 2)] = 5.0;
  auto rep_spike = block_bound_check(p, spike, y1, y2, tau, gamma);
  CHECK_FALSE(rep_spike.holds);

  // the real localized eigenvector over the same block
  auto rep_real = block_bound_check(p, pr, y1, y2, tau, gamma);
  CHECK(rep_real.holds);
}

TEST_CASE("block bound: preconditions") {
  OperatorParams p = basic_params();
  SolutionProfile empty;
  CHECK_THROWS_AS(block_bound_check(p, empty, 0, 50, 0.5, 0.01), std::invalid_argument);
}
