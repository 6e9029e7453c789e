#include "amo/arithmetic.hpp"

#include <algorithm>
#include <cmath>

namespace amo {

CfExpansion continued_fraction(const Rational& x, int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("continued_fraction: max_depth < 1");
  if (!(x > 0 && x < 1)) throw std::invalid_argument("continued_fraction: x must be in (0,1)");

  CfExpansion out;
  // Euclid on the pair (num, den): x = 1/(a_1 + 1/(a_2 + ...)).
  Int num = numerator(x), den = denominator(x);
  Int p_prev = 1, q_prev = 0;  // p_0 = 0, q_0 = 1 convention shifted below
  Int p_cur = 0, q_cur = 1;
  for (int n = 0; n < max_depth && num != 0; ++n) {
    Int a = den / num;
    Int rem = den - a * num;
    out.coeffs.push_back(a);
    Int p_next = a * p_cur + p_prev;
    Int q_next = a * q_cur + q_prev;
    out.convergents.emplace_back(p_next, q_next);
    p_prev = p_cur; q_prev = q_cur;
    p_cur = p_next; q_cur = q_next;
    den = num;
    num = rem;
  }
  return out;
}

Frequency Frequency::from_rational(const Rational& x, int max_depth) {
  Frequency f;
  f.value = x;
  auto cf = continued_fraction(x, max_depth);
  f.cf_coeffs = std::move(cf.coeffs);
  f.convergents = std::move(cf.convergents);

  // Fit Diophantine constants from the stored convergents (reported, not
  // asserted): smallest kappa with ||q_n alpha|| >= tau / q_n^kappa feasible.
  double kappa = 1.0;
  for (const auto& [p, q] : f.convergents) {
    Rational norm = torus_norm(Rational(q) * x);
    if (norm == 0) continue;  // the final convergent reproduces x exactly
    double lq = log_rational(Rational(q));
    kappa = std::max(kappa, -log_rational(norm) / lq);
  }
  double tau = 1.0;
  for (const auto& [p, q] : f.convergents) {
    Rational norm = torus_norm(Rational(q) * x);
    if (norm == 0) continue;
    tau = std::min(tau, std::exp(log_rational(norm) + kappa * log_rational(Rational(q))));
  }
  f.dio_params = {kappa, tau};
  return f;
}

bool Frequency::has_convergent_denominator(const Int& q) const {
  for (const auto& [pn, qn] : convergents)
    if (qn == q) return true;
  return false;
}

namespace {

// Finite-scan limsup estimate. The literal max of -ln||.||/|k| is dominated
// by the trivial k = 1 term (any norm is <= 1/2), so an offset only counts
// as resonant below a noise floor: the per-offset equidistribution scale
// 1/(4k^2) and the whole-scan minimum 1/(4 K_max). With no qualifying offset
// the estimate is 0; it is a lower bound on the limsup either way.
ResonanceEstimate scan_exponent(const Rational& base, const Rational& alpha,
                                long long k_max, bool signed_scan) {
  ResonanceEstimate best;
  Rational scan_floor(1, 4 * k_max);
  for (long long a = 1; a <= k_max; ++a) {
    Rational floor_a = std::min(Rational(1, 4 * a * a), scan_floor);
    for (int s = 0; s < (signed_scan ? 2 : 1); ++s) {
      long long k = s == 0 ? a : -a;
      Rational norm = torus_norm(base + Rational(k) * alpha);
      if (norm == 0) throw DegeneratePhaseError(k);
      if (norm > floor_a) continue;
      double strength = -log_rational(norm) / static_cast<double>(a);
      if (strength > best.estimate) {
        best.estimate = strength;
        best.argmax_k = k;
      }
    }
  }
  return best;
}

}  // namespace

ResonanceEstimate resonance_exponent(ResonanceMode mode, const Frequency& alpha,
                                     const Phase* theta, long long k_max) {
  if (k_max < 1) throw std::invalid_argument("resonance_exponent: K_max < 1");
  if (mode == ResonanceMode::delta) {
    if (theta == nullptr) throw std::invalid_argument("resonance_exponent: delta mode needs a phase");
    return scan_exponent(2 * theta->value, alpha.value, k_max, true);
  }
  return scan_exponent(Rational(0), alpha.value, k_max, false);
}

ResonanceSequence find_resonances(const Frequency& alpha, const Phase& theta,
                                  double varsigma, long long k_max) {
  if (varsigma <= 0) throw std::invalid_argument("find_resonances: varsigma <= 0");
  ResonanceSequence seq;
  seq.threshold = varsigma;
  Rational two_theta = 2 * theta.value;
  // Same scan-depth noise floor as the exponent estimate: small-|k| offsets
  // whose norm is merely rotation-scale small are not resonances.
  Rational scan_floor(1, 4 * k_max);
  for (long long a = 1; a <= k_max; ++a) {
    for (long long k : {a, -a}) {
      Rational norm = torus_norm(two_theta + Rational(k) * alpha.value);
      if (norm == 0) throw DegeneratePhaseError(k);
      if (norm > scan_floor) continue;
      double ln_norm = log_rational(norm);
      if (ln_norm <= -varsigma * static_cast<double>(a))
        seq.entries.push_back({k, -ln_norm / static_cast<double>(a)});
    }
  }
  // Fit c in |K_i| >= c e^{c |K_{i-1}|}: per consecutive pair the equality
  // determines one c (monotone, bisect); report the min over pairs.
  if (seq.entries.size() >= 2) {
    double c_fit = 10.0;
    for (size_t i = 1; i < seq.entries.size(); ++i) {
      double ki = std::llabs(seq.entries[i].k);
      double km = std::llabs(seq.entries[i - 1].k);
      double lo = 0, hi = 10;
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (std::log(mid) + mid * km <= std::log(ki) ? lo : hi) = mid;
      }
      c_fit = std::min(c_fit, lo);
    }
    seq.fitted_gap_c = c_fit;
  }
  return seq;
}

Phase construct_phase(const Frequency& alpha, double delta_target,
                      const std::vector<long long>& k_list,
                      long long verify_k_max) {
  if (delta_target <= 0) throw std::invalid_argument("construct_phase: delta_target <= 0");
  for (size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1] || k_list[0] <= 0)
      throw std::invalid_argument("construct_phase: K_list must be increasing and positive");
  if (!k_list.empty() && k_list[0] <= 0)
    throw std::invalid_argument("construct_phase: K_list must be positive");

  long long k_big = k_list.empty() ? 1 : k_list.back();
  if (denominator(alpha.value) <= 20 * k_big)
    throw std::invalid_argument("construct_phase: frequency denominator below rationality budget");

  long long scan = std::max<long long>(verify_k_max, 2 * k_big);

  if (k_list.empty()) {
    // Non-resonant phase: try a few candidates away from the -k alpha / 2
    // grid and keep the first one the scan certifies.
    for (int j = 3; j < 200; j += 2) {
      Phase cand;
      cand.value = frac(Rational(j, 2 * j + 25));
      try {
        auto est = resonance_exponent(ResonanceMode::delta, alpha, &cand, scan);
        if (est.estimate <= 0.05) {
          cand.delta_hat = est.estimate;
          cand.resonances.threshold = 0.05;
          return cand;
        }
      } catch (const DegeneratePhaseError&) {
        continue;
      }
    }
    throw ConstructionFailedError(0, 0);
  }

  // Nesting budget: each correction must fit strictly inside the previous
  // resonance window.
  for (size_t i = 1; i < k_list.size(); ++i) {
    double lhs = -delta_target * static_cast<double>(k_list[i]);
    double rhs = -delta_target * static_cast<double>(k_list[i - 1]) - std::log(4.0 * k_list[i]);
    if (lhs >= rhs) throw ConstructionFailedError(k_list[i - 1], k_list[i]);
  }

  // Working grid fine enough to hold e^{-delta K_max} with slack.
  long long grid_bits = std::max<long long>(
      320, static_cast<long long>(1.5 * delta_target * k_big / std::log(2.0)) + 64);
  Int grid_den = pow(Int(2), static_cast<unsigned>(grid_bits));

  // Target norms sit a half-decade of pi below e^{-delta K}: eta is read off
  // |sin pi(.)| while strengths are read off the torus norm, and splitting
  // the ln(pi) gap keeps both within their round-trip tolerances. The shift
  // is capped so small delta*K budgets still verify.
  auto target_norm = [&](long long k) {
    double dk = delta_target * static_cast<double>(k);
    double shift = std::min(0.5 * std::log(M_PI), 0.05 * dk);
    return round_to_grid(exp(Real(-dk - shift)), grid_den);
  };

  Rational two_theta =
      frac(-Rational(k_list[0]) * alpha.value + target_norm(k_list[0]));
  for (size_t i = 1; i < k_list.size(); ++i) {
    Rational rho = signed_frac(two_theta + Rational(k_list[i]) * alpha.value);
    Rational target = target_norm(k_list[i]);
    Rational c_plus = target - rho;
    Rational c_minus = -target - rho;
    Rational c = abs(c_plus) <= abs(c_minus) ? c_plus : c_minus;
    // Do not disturb earlier resonances by more than 10% in log scale.
    for (size_t j = 0; j < i; ++j) {
      Rational r_new = signed_frac(two_theta + c + Rational(k_list[j]) * alpha.value);
      if (r_new == 0) throw ConstructionFailedError(k_list[j], k_list[i]);
      double want = -delta_target * static_cast<double>(k_list[j]);
      if (std::fabs(log_rational(torus_norm(r_new)) - want) > 0.1 * std::fabs(want))
        throw ConstructionFailedError(k_list[j], k_list[i]);
    }
    two_theta = frac(two_theta + c);
  }

  Phase phase;
  phase.value = frac(two_theta / 2);

  // Round trip: every requested K_i must come back within 10% in log scale.
  double varsigma = 0.75 * delta_target;
  phase.resonances = find_resonances(alpha, phase, varsigma, scan);
  for (long long k : k_list) {
    bool ok = false;
    for (const auto& e : phase.resonances.entries)
      if (e.k == k && std::fabs(e.strength - delta_target) <= 0.1 * delta_target) ok = true;
    if (!ok) throw ConstructionFailedError(k, k);
  }
  phase.delta_hat =
      resonance_exponent(ResonanceMode::delta, alpha, &phase, scan).estimate;
  return phase;
}

Frequency compatible_frequency(double delta_target,
                               const std::vector<long long>& k_list) {
  if (delta_target <= 0) throw std::invalid_argument("compatible_frequency: delta_target <= 0");
  if (k_list.size() <= 1) {
    // F_24 / F_25; deep enough for site indices up to ~3700.
    return Frequency::from_rational(Rational(46368, 75025));
  }
  if (k_list.size() > 2)
    throw std::invalid_argument("compatible_frequency: at most two resonances supported");

  long long g = k_list[1] - k_list[0];
  if (g <= 0) throw std::invalid_argument("compatible_frequency: K_list must be increasing");

  // ||g alpha|| must sit at e^{-delta K_1} exactly (grid-rounded).
  Int grid_den = pow(Int(2), 320);
  double dk = delta_target * static_cast<double>(k_list[0]);
  double shift = std::min(0.5 * std::log(M_PI), 0.05 * dk);
  Rational r = round_to_grid(exp(Real(-dk - shift)), grid_den);

  // Scan coprime numerators. Any alpha with ||g alpha|| ~ e^{-delta K_1} is
  // e^{-delta K_1}-close to a fraction over g, so a coarse 1/g structure in
  // ||j alpha|| is unavoidable; which j suffer is decided by the numerator.
  // Numerators whose small multiples land near 0 mod g act as strong
  // frequency resonances and are dropped; the rest are tried in order of
  // decreasing worst margin over the envelope-relevant band [K_1/2, 2 K_1],
  // where a near-hit would paint spurious sub-resonances into f at the
  // similarity scales. A numerator is accepted only if a trial construction
  // rescans to exactly the requested resonances and nothing else.
  long long k1 = std::llabs(k_list[0]);
  std::vector<std::pair<long long, long long>> ranked;  // (-margin, a)
  for (long long a = 1; a < g; ++a) {
    if (gcd(Int(a), Int(g)) != 1) continue;
    bool strong = false;
    for (long long k = 1; k < (k1 + 1) / 2 && !strong; ++k) {
      long long r = (k * a) % g;
      double dist = static_cast<double>(std::min(r, g - r)) / static_cast<double>(g);
      strong = -std::log(std::sin(M_PI * std::max(dist, 1e-12))) /
                   static_cast<double>(k) >
               0.75;
    }
    if (strong) continue;
    long long margin = g;
    for (long long k = (k1 + 1) / 2; k <= 2 * k1; ++k) {
      long long r = (k * a) % g;
      margin = std::min(margin, std::min(r, g - r));
    }
    ranked.emplace_back(-margin, a);
  }
  std::sort(ranked.begin(), ranked.end());
  long long scan = std::max<long long>(200, 2 * k_list[1]);
  double varsigma = 0.5 * delta_target;
  for (const auto& [neg_margin, a] : ranked) {
    (void)neg_margin;
    Frequency cand = Frequency::from_rational(Rational(a, g) + r / g, 160);
    try {
      Phase trial = construct_phase(cand, delta_target, k_list, scan);
      auto seq = find_resonances(cand, trial, varsigma, scan);
      if (seq.entries.size() != k_list.size()) continue;
      bool clean = true;
      for (size_t i = 0; i < k_list.size(); ++i)
        if (seq.entries[i].k != k_list[i]) clean = false;
      if (clean) return cand;
    } catch (const Error&) {
      continue;
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
  throw ConstructionFailedError(k_list[0], k_list[1]);
}

X0Eta locate_x0_eta(const Frequency& alpha, const Phase& theta, long long l) {
  if (l == 0) throw std::invalid_argument("locate_x0_eta: l == 0");
  long long radius = 2 * std::llabs(l);
  Rational two_theta = 2 * theta.value;
  Rational best_norm;
  long long best_x = 0;
  bool have = false;
  // Ascending |x|, positive sign first; strict improvement implements the
  // tie-break (smallest |x|, then positive).
  for (long long a = 0; a <= radius; ++a) {
    for (long long x : {a, -a}) {
      if (x == -a && a == 0) break;
      Rational norm = torus_norm(two_theta + Rational(x) * alpha.value);
      if (!have || norm < best_norm) {
        best_norm = norm;
        best_x = x;
        have = true;
      }
    }
  }
  X0Eta out;
  out.x0 = best_x;
  if (best_norm == 0) {
    out.integer_hit = true;
    out.eta = 0;
  } else {
    out.eta = -ln_sin_pi(best_norm) / static_cast<double>(std::llabs(l));
    if (out.eta < 0) out.eta = 0;  // |sin| can round to 1 at desk precision
  }
  return out;
}

LnSinSum ln_sin_sum(const Rational& x, const Frequency& alpha, const Int& q_n) {
  if (!alpha.has_convergent_denominator(q_n))
    throw std::invalid_argument("ln_sin_sum: q_n is not a stored convergent denominator");
  long long q = q_n.convert_to<long long>();
  std::vector<double> terms(static_cast<size_t>(q));
  long long k0 = 0;
  Rational min_norm;
  for (long long k = 0; k < q; ++k) {
    Rational arg = x + Rational(k) * alpha.value;
    Rational norm = torus_norm(arg);
    if (norm == 0)
      throw DegenerateArgumentError("ln_sin_sum: sin is exactly zero at k = " + std::to_string(k));
    terms[static_cast<size_t>(k)] = ln_sin_pi(arg);
    if (k == 0 || norm < min_norm) {
      min_norm = norm;
      k0 = k;
    }
  }
  LnSinSum out;
  out.k0 = k0;
  double s = 0;
  for (long long k = 0; k < q; ++k)
    if (k != k0) s += terms[static_cast<size_t>(k)];
  out.value = s + static_cast<double>(q - 1) * std::log(2.0);
  return out;
}

}  // namespace amo
