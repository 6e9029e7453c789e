#ifndef AMO_ASYMPTOTICS_HPP
#define AMO_ASYMPTOTICS_HPP

#include <vector>

#include "amo/arithmetic.hpp"
#include "amo/profile.hpp"

namespace amo {

enum class EnvelopeKind { f, g };

// Decay/growth envelope with explicit (x0, eta):
//   f, x0*l <= 0:             -|l| ln_lambda
//   f, x0*l >  0:             lse(-(|x0|+|l-x0|) ln_lambda + eta |l|, -|l| ln_lambda)
//   g, x0*l <= 0 or |x0|>|l|:  |l| ln_lambda
//   g, |x0| <= |l| <= 2|x0|:  lse((ln_lambda - eta)|l|, |2 x0 - l| ln_lambda)
//   g, |l| > 2|x0|:           (ln_lambda - eta)|l|
// Sums stay in log form throughout; the branches differ by hundreds of nats.
double envelope_log(EnvelopeKind kind, long long x0, double eta,
                    double ln_lambda, long long l);

// x0/eta are l-dependent through the scan radius 2|l|, but a minimizer found
// at radius 2l stays the minimizer for any l' <= l that keeps it in range, so
// queries are served from a single piecewise-constant segment.
class X0Cache {
 public:
  X0Cache(Frequency alpha, Phase theta);
  X0Eta at(long long l);

 private:
  Frequency alpha_;
  Phase theta_;
  bool have_ = false;
  long long l_seen_ = 0;
  long long x0_ = 0;
  double ln_sin_ = 0;  // ln|sin pi(2 theta + x0 alpha)|
  bool integer_hit_ = false;
};

struct EnvelopeModel {
  EnvelopeKind kind;
  double ln_lambda;
  X0Cache cache;

  EnvelopeModel(EnvelopeKind k, const Frequency& alpha, const Phase& theta,
                double ln_lam)
      : kind(k), ln_lambda(ln_lam), cache(alpha, theta) {}

  double log_at(long long l);
};

// One-shot evaluations (no cache reuse across calls).
double f_model(const Frequency& alpha, const Phase& theta, double ln_lambda,
               long long l);
double g_model(const Frequency& alpha, const Phase& theta, double ln_lambda,
               long long l);

struct BoundReport {
  bool pass = false;
  double epsilon = 0;
  long long k_onset = 0;
  long long n_max = 0;
  std::vector<long long> sites;
  std::vector<double> upper_slack;  // model + eps|l| - measured
  std::vector<double> lower_slack;  // measured - model + eps|l|
  double worst_upper = 0;
  double worst_lower = 0;
};

// Two-sided check model*e^{-eps|l|} <= measured <= model*e^{+eps|l|} in logs
// over k_onset <= |l| <= N. Profile form: measured(l) = logU(anchor + l),
// both signs of l. Array form: log_norms[i] is the measurement at
// l = l_first + i, one-sided.
BoundReport verify_bounds(const SolutionProfile& profile, EnvelopeModel& model,
                          double eps, long long k_onset);
BoundReport verify_bounds(const std::vector<double>& log_norms,
                          long long l_first, EnvelopeModel& model, double eps,
                          long long k_onset);

struct DensityStats {
  double limsup_slope = 0;
  double liminf_slope = 0;
  double exceptional_density = 0;  // fraction with |slope_k - ln_lambda| > eps
};

// Per-site slopes s_k = -v(k)/k (decay) or +v(k)/k; extrema taken over
// dyadic blocks of [k_first, N]. Requires N >= 10 k_first.
DensityStats density_stats(const std::vector<double>& log_values,
                           long long k_first, bool decay, double ln_lambda,
                           double eps);

}  // namespace amo

#endif
