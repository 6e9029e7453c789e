#include "amo/numeric.hpp"

#include <boost/math/constants/constants.hpp>

namespace amo {

namespace {
unsigned g_precision_bits = 256;
// apply the default before main() so Real never runs at the library default
const bool g_precision_init = [] {
  set_precision_bits(256);
  return true;
}();
}

void set_precision_bits(unsigned bits) {
  if (bits < 128) throw std::invalid_argument("precision bits must be >= 128");
  g_precision_bits = bits;
  // mpfr precision is set in decimal digits by boost; round up.
  Real::default_precision(static_cast<unsigned>(bits * 0.30103) + 2);
}

unsigned precision_bits() { return g_precision_bits; }

Real pi_real() { return boost::math::constants::pi<Real>(); }

Rational frac(const Rational& x) {
  Int fl = numerator(x) / denominator(x);
  // mpz division truncates toward zero; fix up for negatives.
  if (x < 0 && fl * denominator(x) != numerator(x)) fl -= 1;
  return x - fl;
}

Rational torus_norm(const Rational& x) {
  Rational f = frac(x);
  Rational other = 1 - f;
  return f <= other ? f : other;
}

Rational signed_frac(const Rational& x) {
  Rational f = frac(x);
  return f > Rational(1, 2) ? f - 1 : f;
}

double log_rational(const Rational& x) {
  if (x == 0) return neg_inf;
  static const double ln2 = std::log(2.0);
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, numerator(x).backend().data());
  double md = mpz_get_d_2exp(&ed, denominator(x).backend().data());
  return std::log(std::fabs(mn)) - std::log(std::fabs(md)) +
         static_cast<double>(en - ed) * ln2;
}

double ln_sin_pi(const Rational& x) {
  Rational t = torus_norm(x);
  if (t == 0) return neg_inf;
  double td = t.convert_to<double>();
  if (td > 1e-6) {
    return std::log(std::sin(M_PI * td));
  }
  // |sin(pi t)| = pi t * sinc; near zero work off the exact log of t.
  double lt = log_rational(t);
  double pt2 = M_PI * M_PI * td * td;
  return std::log(M_PI) + lt + std::log1p(-pt2 / 6.0 * (1.0 - pt2 / 20.0));
}

Rational round_to_grid(const Real& x, const Int& den) {
  Real scaled = x * Real(den);
  Real r = floor(scaled + Real(0.5));
  Int p = r.convert_to<Int>();
  return Rational(p, den);
}

}  // namespace amo
