#ifndef AMO_NUMERIC_HPP
#define AMO_NUMERIC_HPP

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace amo {

namespace mp = boost::multiprecision;

// Exact arithmetic for frequencies/phases; all torus norms are exact.
using Int = mp::mpz_int;
using Rational = mp::mpq_rational;

// Extended-precision scalar for energies and site recursions.
// Variable precision, set once at startup (default 256 fractional bits).
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

void set_precision_bits(unsigned bits);
unsigned precision_bits();

Real pi_real();

// x - floor(x), in [0,1)
Rational frac(const Rational& x);

// distance to the nearest integer, exact, in [0, 1/2]
Rational torus_norm(const Rational& x);

// x - nearest integer, in (-1/2, 1/2]
Rational signed_frac(const Rational& x);

// ln|x| for exact rationals via integer bit-length scaling.
// Relative error <= 1e-12; no big-float transcendentals involved.
// Returns -inf for x == 0.
double log_rational(const Rational& x);

// ln|sin(pi x)|, argument reduced mod 1 exactly before any floating step.
// Returns -inf when x is an integer.
double ln_sin_pi(const Rational& x);

// Nearest rational p/den to x.
Rational round_to_grid(const Real& x, const Int& den);

// log(e^a + e^b) without materializing either term.
inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// A magnitude carried as sign * e^{log}. sign == 0 means exact zero.
struct SignLog {
  int sign = 0;
  double log = neg_inf;

  double signed_value() const { return sign * std::exp(log); }
};

// Error taxonomy. Preconditions use std::invalid_argument directly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegeneratePhaseError : Error {
  long long k;
  explicit DegeneratePhaseError(long long k_)
      : Error("degenerate phase: ||2*theta + k*alpha|| == 0 at k = " + std::to_string(k_)), k(k_) {}
};

struct DegenerateArgumentError : Error {
  using Error::Error;
};

struct ConstructionFailedError : Error {
  long long k_prev, k_next;
  ConstructionFailedError(long long a, long long b)
      : Error("phase construction failed: corrections collide between K = " + std::to_string(a) +
              " and K = " + std::to_string(b)),
        k_prev(a), k_next(b) {}
};

struct BoxSingularError : Error {
  BoxSingularError() : Error("box restriction is singular at this energy") {}
  using Error::Error;
};

struct DegenerateSetError : Error {
  using Error::Error;
};

struct UnverifiedHypothesisError : Error {
  using Error::Error;
};

struct IllConditionedEigenpairError : Error {
  double achieved_mismatch;
  explicit IllConditionedEigenpairError(double m)
      : Error("eigenpair gluing stalled at mismatch " + std::to_string(m)), achieved_mismatch(m) {}
};

struct InvalidRegimeError : Error {
  using Error::Error;
};

struct NotAResonanceError : Error {
  using Error::Error;
};

struct CoverageError : Error {
  using Error::Error;
};

}  // namespace amo

#endif
