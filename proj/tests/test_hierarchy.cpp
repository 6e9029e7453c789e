#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "amo/hierarchy.hpp"
#include "support.hpp"

using namespace amo;
using amo::testsupport::golden;

namespace {

SolutionProfile profile_on(long long n, std::vector<double> logU) {
  SolutionProfile pr;
  pr.n_lo = -n;
  pr.n_hi = n;
  pr.anchor = 0;
  pr.logmag_phi = logU;
  pr.sign.assign(logU.size(), 1);
  pr.logU = std::move(logU);
  return pr;
}

// max of the plain envelope and its hierarchy translates: reflected copies
// at the depth-1 resonance peaks and an unreflected copy at K_2 - K_1
SolutionProfile two_resonance_profile(EnvelopeModel& f, long long n) {
  auto F = [&](long long l) { return l == 0 ? 0.0 : f.log_at(l); };
  double h20 = F(20), h120 = F(120), h100 = F(120) + F(20);
  std::vector<double> u;
  for (long long l = -n; l <= n; ++l) {
    double v = F(l);
    v = std::max(v, h20 + F(-(l - 20)));
    v = std::max(v, h120 + F(-(l - 120)));
    v = std::max(v, h100 + F(l - 100));
    u.push_back(v);
  }
  return profile_on(n, std::move(u));
}

}  // namespace

TEST_CASE("local maxima: peak, plateau, monotone, preconditions") {
  std::vector<double> v(21, 0.0);
  for (long long l = -10; l <= 10; ++l)
    v[static_cast<size_t>(l + 10)] = -std::fabs(static_cast<double>(l - 2));
  auto pr = profile_on(10, v);
  CHECK(local_k_maxima(pr, 5, -5, 5) == std::vector<long long>{2});

  // plateau reports its leftmost site only
  v[static_cast<size_t>(3 + 10)] = v[static_cast<size_t>(2 + 10)];
  auto pl = profile_on(10, v);
  CHECK(local_k_maxima(pl, 3, -5, 6) == std::vector<long long>{2});

  std::vector<double> mono;
  for (long long l = -10; l <= 10; ++l) mono.push_back(0.3 * l);
  CHECK(local_k_maxima(profile_on(10, mono), 4, -5, 5).empty());

  CHECK_THROWS_AS(local_k_maxima(pr, 0, -5, 5), std::invalid_argument);
  CHECK_THROWS_AS(local_k_maxima(pr, 5, -8, 8), std::invalid_argument);
}

TEST_CASE("local maxima: f-model profile peaks at the resonance") {
  Frequency alpha = golden();
  Phase theta = construct_phase(alpha, 0.5, {20});
  EnvelopeModel f(EnvelopeKind::f, alpha, theta, 1.0);
  std::vector<double> u;
  for (long long l = -60; l <= 60; ++l)
    u.push_back(l == 0 ? 0.0 : f.log_at(l));
  auto pr = profile_on(60, std::move(u));
  auto maxima = local_k_maxima(pr, 3, 10, 30);
  REQUIRE(maxima.size() == 1);
  CHECK(std::llabs(maxima[0] - 20) <= 3);
}

TEST_CASE("build_hierarchy: empty resonance sequence") {
  std::vector<double> u;
  for (long long l = -40; l <= 40; ++l)
    u.push_back(-std::fabs(static_cast<double>(l)));
  HierarchyOptions opts;
  opts.varsigma = 0.375;
  opts.ln_lambda = 1.0;
  auto rep = build_hierarchy(profile_on(40, std::move(u)), ResonanceSequence{},
                             golden(), Phase{}, opts);
  CHECK(rep.k0 == 0);
  CHECK(rep.nodes.empty());
  CHECK(rep.k_hat_est == 1);
}

TEST_CASE("build_hierarchy: two-resonance synthetic profile") {
  Frequency alpha = compatible_frequency(0.5, {20, 120});
  Phase theta = construct_phase(alpha, 0.5, {20, 120});
  REQUIRE(theta.resonances.entries.size() == 2);
  EnvelopeModel f(EnvelopeKind::f, alpha, theta, 1.0);
  auto pr = two_resonance_profile(f, 160);

  HierarchyOptions opts;
  opts.varsigma = theta.resonances.threshold;
  opts.ln_lambda = 1.0;
  auto rep = build_hierarchy(pr, theta.resonances, alpha, theta, opts);

  REQUIRE(rep.nodes.size() == 3);
  CHECK(rep.k_hat_est <= 3);
  // depth-1 nodes at the resonances
  CHECK(rep.nodes[0].max.depth == 1);
  CHECK(std::llabs(rep.nodes[0].max.position - 20) <= 3);
  CHECK(rep.nodes[1].max.depth == 1);
  CHECK(std::llabs(rep.nodes[1].max.position - 120) <= 3);
  // depth-2 node at K_2 - K_1, nested in the K_2 window
  const auto& deep = rep.nodes[2];
  CHECK(deep.max.depth == 2);
  CHECK(deep.max.index_path == std::vector<size_t>{1, 0});
  CHECK(deep.max.deviation <= rep.k_hat_est * rep.k_hat_est);
  CHECK(std::llabs(deep.max.position - 100) <= 3);
  CHECK(rep.nodes[static_cast<size_t>(deep.parent)].max.position ==
        rep.nodes[1].max.position);

  // the K_2 node window admits a similarity test and it passes
  CHECK(rep.nodes[1].similarity.tested);
  CHECK(rep.nodes[1].similarity.pass);
}

TEST_CASE("reflective similarity: sign sensitivity at the resonant peak") {
  Frequency alpha = compatible_frequency(0.5, {20, 120});
  Phase theta = construct_phase(alpha, 0.5, {20, 120});
  EnvelopeModel f(EnvelopeKind::f, alpha, theta, 1.0);
  auto pr = two_resonance_profile(f, 160);

  HierarchyOptions opts;
  opts.varsigma = 1.0;  // widen the range past the asymmetric part of f
  opts.ln_lambda = 1.0;
  LocalMaximum node;
  node.position = 120;
  node.window = 60;
  node.depth = 1;
  node.index_path = {1};
  node.predicted = 120;
  REQUIRE(node.reflection_sign() == -1);

  auto res = reflective_similarity(pr, node, alpha, theta, opts, 1);
  REQUIRE(res.tested);
  CHECK(res.pass);
  CHECK(res.max_deviation < res.max_deviation_flipped);
  // the wrong sign misses the K_2 - K_1 bump by about delta K_1 nats
  CHECK(res.max_deviation_flipped > 6.0);

  // an unreflected profile at this node fails against the reflected model
  SolutionProfile flat = pr;
  for (long long l = 120 - 40; l <= 120 + 40; ++l)
    flat.logU[flat.idx(l)] =
        pr.u_log(120) + (l == 120 ? 0.0 : f.log_at(l - 120));
  auto bad = reflective_similarity(flat, node, alpha, theta, opts, 1);
  REQUIRE(bad.tested);
  CHECK_FALSE(bad.pass);
}

TEST_CASE("build_hierarchy: coverage error when the window is too small") {
  Frequency alpha = compatible_frequency(0.5, {20, 120});
  Phase theta = construct_phase(alpha, 0.5, {20, 120});
  EnvelopeModel f(EnvelopeKind::f, alpha, theta, 1.0);
  auto pr = two_resonance_profile(f, 50);
  HierarchyOptions opts;
  opts.varsigma = theta.resonances.threshold;
  opts.ln_lambda = 1.0;
  CHECK_THROWS_AS(build_hierarchy(pr, theta.resonances, alpha, theta, opts),
                  CoverageError);
}
