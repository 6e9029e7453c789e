#ifndef AMO_OPERATOR_HPP
#define AMO_OPERATOR_HPP

#include <vector>

#include "amo/arithmetic.hpp"
#include "amo/profile.hpp"

namespace amo {

// (H u)(n) = u(n+1) + u(n-1) + lambda v(theta + n alpha) u(n) with
// v(x) = sum_j c_j cos(2 pi j x); the default c = {2} is the almost Mathieu
// potential, site term 2 lambda cos(2 pi x). This matches the transfer
// matrix ((E - 2 lambda cos, -1), (1, 0)) and the Lyapunov exponent
// L = ln lambda on the spectrum -- beware conventions where the site term
// carries an extra factor 2. An empty coefficient list is the free
// Laplacian.
struct OperatorParams {
  Frequency alpha;
  Phase theta;
  double ln_lambda = 0;  // nats
  Real energy = Real(0);
  std::vector<double> cos_coeffs{2.0};  // c_j for cos(2 pi j x), j = 1..

  Real lambda() const { return exp(Real(ln_lambda)); }
  // lambda v(theta + n alpha), exact angle reduction mod 1
  Real site_term(long long n) const;
};

// e^{log_scale} * m with the max-abs entry of m kept in [1/2, 2].
struct LogMat2 {
  Real m[2][2];
  double log_scale = 0;

  static LogMat2 identity();
  void renormalize();
  // log of the Frobenius norm of the represented matrix
  double log_frobenius() const;
};

LogMat2 matmul(const LogMat2& lhs, const LogMat2& rhs);

// e^{log_scale} * v with the euclidean norm of v in [1/2, 2].
struct LogVec2 {
  Real v[2];
  double log_scale = 0;

  void renormalize();
  double log_norm() const;
};

LogVec2 apply(const LogMat2& mat, const LogVec2& vec);

// Ordered product A(theta+(m+k-1)alpha) ... A(theta+m alpha); k = 0 is the
// identity, k < 0 the inverse-cocycle convention A_{-k}(x) = A_k(x-k alpha)^{-1}.
LogMat2 transfer_product(const OperatorParams& params, long long k, long long m = 0);

// log Frobenius norm of A_k(theta + m alpha) for k = 1..n, one sweep.
std::vector<double> transfer_norm_profile(const OperatorParams& params, long long n,
                                          long long m = 0);

// P_k = det(E - H restricted to [shift, shift+k-1]), three-term recursion in
// sign/log form; index k runs 0..k_max with P_0 = 1.
std::vector<SignLog> determinant_logs(const OperatorParams& params, long long k_max,
                                      long long theta_shift = 0);

enum class GreenSide { left, right };

// Cramer: side=left gives |G_[x1,x2](x1, y)|, side=right |G_[x1,x2](y, x2)|,
// as sign and log magnitude.
SignLog green_entry(const OperatorParams& params, long long x1, long long x2,
                    long long y, GreenSide side);

struct RegularityWitness {
  bool is_regular = false;
  long long x1 = 0;
  long long x2 = 0;
};

// First interval [x1, x1+k-1] containing y (deterministic sweep, x1
// ascending) with both boundary Green values below e^{-tau |y - x_i|} and
// |y - x_i| >= k/40.
RegularityWitness regularity_check(const OperatorParams& params, long long y,
                                   double tau, long long k);

struct UniformityReport {
  double eps1 = 0;       // the set is eps1-uniform (certified grid max)
  size_t argmax_i = 0;
  double argmax_x = 0;
  double upper_gap = 0;  // Lipschitz gap to an upper bound on the true max
};

// max over x in [-1,1] and i of (1/k) sum_{j != i} (ln|x - cos 2 pi theta_j|
// - ln|cos 2 pi theta_i - cos 2 pi theta_j|), k = #samples - 1. Chebyshev
// grid of x_grid_size points plus golden-section refinement.
UniformityReport uniformity_product(const std::vector<Rational>& theta_samples,
                                    int x_grid_size);

struct BlockBoundReport {
  bool holds = false;
  double margin = 0;  // worst slack in nats over the checked band
};

// Block-expansion bound: r_y <= max_i r_{y_i} e^{-tau(|y-y_i| - 3 gamma k)}
// over the interior band, with r_y the max of |phi| within 10 gamma k of y.
// Regularity of every checked y is established first via regularity_check;
// failure to establish it raises UnverifiedHypothesisError (distinct from a
// bound violation). The band is clamped so the regularity scale k1 >= 40 fits.
BlockBoundReport block_bound_check(const OperatorParams& params,
                                   const SolutionProfile& profile, long long y1,
                                   long long y2, double tau, double gamma);

}  // namespace amo

#endif
