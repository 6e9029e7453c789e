#ifndef AMO_EIGENSOLVE_HPP
#define AMO_EIGENSOLVE_HPP

#include <vector>

#include "amo/operator.hpp"

namespace amo {

// All eigenvalues of the Dirichlet restriction to box in (e_lo, e_hi], each
// bracketed to width <= tol by Sturm-count bisection (inertia of H - E via
// the LDL^T pivot recursion).
std::vector<Real> box_eigenvalues(const OperatorParams& params, const BoxSpec& box,
                                  const Real& e_lo, const Real& e_hi, const Real& tol);

// Sturm count: number of box eigenvalues strictly below E.
long long sturm_count(const OperatorParams& params, const BoxSpec& box, const Real& E);

// j-th (0-based) box eigenvalue by Sturm-count bisection; (e_lo, e_hi] must
// bracket the whole spectrum of the restriction.
Real eigenvalue_by_index(const OperatorParams& params, const BoxSpec& box,
                         long long j, const Real& e_lo, const Real& e_hi,
                         const Real& tol);

// Eigenvector by two-sided shooting glued at the magnitude maximum; E is
// refined inside its bracket until the two shooting directions are parallel
// at the glue site (mismatch <= 1e-8, error above 1e-6).
SolutionProfile eigenvector_profile(const OperatorParams& params, const BoxSpec& box,
                                    const Real& E);

// Transfer propagation of the solution with U(0) = u0 = (phi(0), phi(-1))
// over the window [-N, N]; generally a growing solution.
SolutionProfile solution_profile(const OperatorParams& params, const LogVec2& u0,
                                 long long N);

}  // namespace amo

#endif
