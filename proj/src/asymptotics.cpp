#include "amo/asymptotics.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <utility>

namespace amo {

double envelope_log(EnvelopeKind kind, long long x0, double eta,
                    double ln_lambda, long long l) {
  if (l == 0) throw std::invalid_argument("envelope is defined for l != 0");
  double al = static_cast<double>(std::llabs(l));
  double ax = static_cast<double>(std::llabs(x0));
  bool same_side = x0 != 0 && (x0 > 0) == (l > 0);
  if (kind == EnvelopeKind::f) {
    if (!same_side) return -al * ln_lambda;
    double detour = ax + static_cast<double>(std::llabs(l - x0));
    return log_sum_exp(-detour * ln_lambda + eta * al, -al * ln_lambda);
  }
  if (!same_side || ax > al) return al * ln_lambda;
  if (al <= 2 * ax)
    return log_sum_exp((ln_lambda - eta) * al,
                       static_cast<double>(std::llabs(2 * x0 - l)) * ln_lambda);
  return (ln_lambda - eta) * al;
}

X0Cache::X0Cache(Frequency alpha, Phase theta)
    : alpha_(std::move(alpha)), theta_(std::move(theta)) {}

X0Eta X0Cache::at(long long l) {
  if (l == 0) throw std::invalid_argument("x0 scan is defined for l != 0");
  long long al = std::llabs(l);
  if (have_ && al <= l_seen_ && std::llabs(x0_) <= 2 * al) {
    X0Eta out;
    out.x0 = x0_;
    out.eta = -ln_sin_ / static_cast<double>(al);
    out.integer_hit = integer_hit_;
    return out;
  }
  X0Eta fresh = locate_x0_eta(alpha_, theta_, l);
  if (!have_ || al > l_seen_) {
    have_ = true;
    l_seen_ = al;
    x0_ = fresh.x0;
    ln_sin_ = -fresh.eta * static_cast<double>(al);
    integer_hit_ = fresh.integer_hit;
  }
  return fresh;
}

double EnvelopeModel::log_at(long long l) {
  X0Eta xe = cache.at(l);
  return envelope_log(kind, xe.x0, xe.eta, ln_lambda, l);
}

double f_model(const Frequency& alpha, const Phase& theta, double ln_lambda,
               long long l) {
  X0Eta xe = locate_x0_eta(alpha, theta, l);
  return envelope_log(EnvelopeKind::f, xe.x0, xe.eta, ln_lambda, l);
}

double g_model(const Frequency& alpha, const Phase& theta, double ln_lambda,
               long long l) {
  X0Eta xe = locate_x0_eta(alpha, theta, l);
  return envelope_log(EnvelopeKind::g, xe.x0, xe.eta, ln_lambda, l);
}

namespace {

void push_site(BoundReport& rep, EnvelopeModel& model, long long l,
               double measured, double eps) {
  double m = model.log_at(l);
  double slack = eps * static_cast<double>(std::llabs(l));
  rep.sites.push_back(l);
  rep.upper_slack.push_back(m + slack - measured);
  rep.lower_slack.push_back(measured - m + slack);
}

void finish_report(BoundReport& rep) {
  rep.worst_upper = rep.worst_lower = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < rep.sites.size(); ++i) {
    rep.worst_upper = std::min(rep.worst_upper, rep.upper_slack[i]);
    rep.worst_lower = std::min(rep.worst_lower, rep.lower_slack[i]);
  }
  rep.pass = !rep.sites.empty() && rep.worst_upper >= 0 && rep.worst_lower >= 0;
}

}  // namespace

BoundReport verify_bounds(const SolutionProfile& profile, EnvelopeModel& model,
                          double eps, long long k_onset) {
  if (k_onset < 1) throw std::invalid_argument("onset must be >= 1");
  long long n = std::min(profile.anchor - profile.n_lo,
                         profile.n_hi - profile.anchor);
  if (n < k_onset)
    throw std::invalid_argument("profile window does not reach the onset");
  BoundReport rep;
  rep.epsilon = eps;
  rep.k_onset = k_onset;
  rep.n_max = n;
  for (long long l = -n; l <= n; ++l) {
    if (std::llabs(l) < k_onset) continue;
    push_site(rep, model, l, profile.u_log(profile.anchor + l), eps);
  }
  finish_report(rep);
  return rep;
}

BoundReport verify_bounds(const std::vector<double>& log_norms,
                          long long l_first, EnvelopeModel& model, double eps,
                          long long k_onset) {
  if (k_onset < 1) throw std::invalid_argument("onset must be >= 1");
  long long l_last = l_first + static_cast<long long>(log_norms.size()) - 1;
  if (log_norms.empty() || l_first < 1 || l_last < k_onset)
    throw std::invalid_argument("log-norm window does not reach the onset");
  BoundReport rep;
  rep.epsilon = eps;
  rep.k_onset = k_onset;
  rep.n_max = l_last;
  for (long long l = std::max(l_first, k_onset); l <= l_last; ++l)
    push_site(rep, model, l, log_norms[static_cast<size_t>(l - l_first)], eps);
  finish_report(rep);
  return rep;
}

DensityStats density_stats(const std::vector<double>& log_values,
                           long long k_first, bool decay, double ln_lambda,
                           double eps) {
  long long k_last = k_first + static_cast<long long>(log_values.size()) - 1;
  if (k_first < 1 || k_last < 10 * k_first)
    throw std::invalid_argument("density window must span [K, N] with N >= 10K");
  DensityStats st;
  st.limsup_slope = -std::numeric_limits<double>::infinity();
  st.liminf_slope = std::numeric_limits<double>::infinity();
  size_t exceptional = 0;
  // dyadic blocks [K 2^j, K 2^{j+1})
  for (long long lo = k_first; lo <= k_last; lo *= 2) {
    long long hi = std::min(2 * lo - 1, k_last);
    for (long long k = lo; k <= hi; ++k) {
      double v = log_values[static_cast<size_t>(k - k_first)];
      double slope = (decay ? -v : v) / static_cast<double>(k);
      st.limsup_slope = std::max(st.limsup_slope, slope);
      st.liminf_slope = std::min(st.liminf_slope, slope);
      if (std::fabs(slope - ln_lambda) > eps) ++exceptional;
    }
  }
  st.exceptional_density =
      static_cast<double>(exceptional) / static_cast<double>(log_values.size());
  return st;
}

}  // namespace amo
