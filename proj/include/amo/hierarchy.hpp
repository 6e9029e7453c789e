#ifndef AMO_HIERARCHY_HPP
#define AMO_HIERARCHY_HPP

#include <vector>

#include "amo/asymptotics.hpp"

namespace amo {

// Local K-maximum b of the profile found near a predicted hierarchy
// position k0 + sum_i (-1)^i K_{j_i}. depth is the path length, so the
// paper's index s is depth - 1 and the similarity reflection sign is
// (-1)^{s+1}: odd depth compares against the reflected envelope.
struct LocalMaximum {
  long long position = 0;
  long long window = 0;  // K of the local K-maximum
  int depth = 0;
  std::vector<size_t> index_path;  // j_0 > j_1 > ... into the resonance list
  long long predicted = 0;
  long long deviation = 0;

  int reflection_sign() const { return depth % 2 == 1 ? -1 : 1; }
};

struct SimilarityResult {
  bool tested = false;
  bool pass = false;
  double max_deviation = 0;          // max |Delta(x)| with the predicted sign
  double max_deviation_flipped = 0;  // same with the opposite sign
  long long x_lo = 0;                // admissible |x| range
  long long x_hi = 0;
};

struct HierarchyNode {
  LocalMaximum max;
  SimilarityResult similarity;
  long long parent = -1;  // index into nodes, -1 for depth-1
};

struct HierarchyReport {
  long long k0 = 0;
  long long k_hat_est = 0;
  std::vector<HierarchyNode> nodes;
  std::vector<std::vector<size_t>> untestable;  // window/theorem limits
  std::vector<std::vector<size_t>> missing;     // searched, no maximum found
};

struct HierarchyOptions {
  int max_depth = 2;
  double varsigma = 0;    // resonance threshold, nats per site
  double ln_lambda = 0;
  double c_lower = 3.0;   // C in the admissible range C K_hat^{k+1} <= |x|
  double c0_floor = 3.0;  // absolute similarity floor, nats
  double eps = 0.15;      // nats per site
};

// All b in [lo, hi] with logU(b) >= logU(b + t) for |t| <= K; plateaus
// report the leftmost site only. The probe window [lo - K, hi + K] must lie
// inside the profile.
std::vector<long long> local_k_maxima(const SolutionProfile& profile,
                                      long long K, long long lo, long long hi);

// Detect the reflective hierarchy: depth-1 maxima near k0 + K_j in windows
// varsigma/(2 ln lambda) K_j, K_hat_est fitted as the smallest integer with
// all depth-1 deviations <= K_hat_est^2, deeper nodes searched in radius
// K_hat_est^depth around the alternating-sum prediction. Depth-1 positions
// falling outside the profile raise CoverageError; deeper paths that do not
// fit (window, nesting, or K_{j_s} < K_hat^depth) land in `untestable`.
HierarchyReport build_hierarchy(const SolutionProfile& profile,
                                const ResonanceSequence& resonances,
                                const Frequency& alpha, const Phase& theta,
                                const HierarchyOptions& opts);

// Delta(x) = [logU(b+x) - logU(b)] - log f(sign * x) over the admissible
// range c_lower K_hat^depth <= |x| <= varsigma/(4 ln lambda) K_{j_last};
// pass iff |Delta(x)| <= eps |x| + c0_floor pointwise. The flipped-sign
// deviation is reported for the alternation check.
SimilarityResult reflective_similarity(const SolutionProfile& profile,
                                       const LocalMaximum& node,
                                       const Frequency& alpha,
                                       const Phase& theta,
                                       const HierarchyOptions& opts,
                                       long long k_hat);

}  // namespace amo

#endif
