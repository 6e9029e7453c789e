#include "amo/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace amo {

std::vector<long long> local_k_maxima(const SolutionProfile& profile,
                                      long long K, long long lo, long long hi) {
  if (K < 1) throw std::invalid_argument("local-maximum window must be >= 1");
  if (lo > hi || lo - K < profile.n_lo || hi + K > profile.n_hi)
    throw std::invalid_argument("search window must fit inside the profile");
  std::vector<long long> out;
  for (long long b = lo; b <= hi; ++b) {
    double v = profile.u_log(b);
    bool ok = true;
    // leftmost plateau site: strict on the left, weak on the right
    for (long long t = 1; t <= K && ok; ++t)
      ok = v > profile.u_log(b - t) && v >= profile.u_log(b + t);
    if (ok) out.push_back(b);
  }
  return out;
}

namespace {

long long detect_window(double varsigma, double ln_lambda, long long K) {
  return std::max<long long>(
      1, static_cast<long long>(std::floor(varsigma / (2.0 * ln_lambda) *
                                           static_cast<double>(K))));
}

// nearest candidate to the prediction; ties resolve to the smaller site
bool nearest_maximum(const SolutionProfile& profile, long long W,
                     long long predicted, long long radius, long long* found) {
  long long lo = std::max(predicted - radius, profile.n_lo + W);
  long long hi = std::min(predicted + radius, profile.n_hi - W);
  if (lo > hi) return false;
  auto cands = local_k_maxima(profile, W, lo, hi);
  if (cands.empty()) return false;
  long long best = cands.front();
  for (long long b : cands)
    if (std::llabs(b - predicted) < std::llabs(best - predicted)) best = b;
  *found = best;
  return true;
}

long long ipow(long long base, int e) {
  long long r = 1;
  while (e-- > 0) r *= base;
  return r;
}

std::string path_string(const std::vector<size_t>& path) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < path.size(); ++i) os << (i ? "," : "") << path[i];
  os << ")";
  return os.str();
}

}  // namespace

HierarchyReport build_hierarchy(const SolutionProfile& profile,
                                const ResonanceSequence& resonances,
                                const Frequency& alpha, const Phase& theta,
                                const HierarchyOptions& opts) {
  if (opts.ln_lambda <= 0 || opts.varsigma <= 0 || opts.max_depth < 1)
    throw std::invalid_argument("hierarchy needs ln_lambda, varsigma > 0 and depth >= 1");
  const auto& ent = resonances.entries;
  HierarchyReport rep;
  rep.k0 = profile.anchor;
  rep.k_hat_est = 1;

  // depth 1: one path per resonance, searched in its own detection window
  std::vector<std::vector<size_t>> uncovered;
  long long max_dev = 0;
  for (size_t j = 0; j < ent.size(); ++j) {
    long long Kj = ent[j].k;
    long long W = detect_window(opts.varsigma, opts.ln_lambda, std::llabs(Kj));
    long long predicted = rep.k0 + Kj;
    if (predicted - W < profile.n_lo || predicted + W > profile.n_hi) {
      uncovered.push_back({j});
      continue;
    }
    long long b = 0;
    if (!nearest_maximum(profile, W, predicted, W, &b)) {
      rep.missing.push_back({j});
      continue;
    }
    HierarchyNode node;
    node.max.position = b;
    node.max.window = W;
    node.max.depth = 1;
    node.max.index_path = {j};
    node.max.predicted = predicted;
    node.max.deviation = std::llabs(b - predicted);
    rep.nodes.push_back(node);
    max_dev = std::max(max_dev, node.max.deviation);
  }
  if (!uncovered.empty()) {
    std::string msg = "profile window too small for depth-1 paths:";
    for (const auto& p : uncovered) msg += " " + path_string(p);
    throw CoverageError(msg);
  }
  while (rep.k_hat_est * rep.k_hat_est < max_dev) ++rep.k_hat_est;

  // deeper levels: alternating-sum predictions, radius K_hat^depth
  size_t level_begin = 0;
  for (int depth = 2; depth <= opts.max_depth; ++depth) {
    size_t level_end = rep.nodes.size();
    long long radius = ipow(rep.k_hat_est, depth);
    for (size_t pi = level_begin; pi < level_end; ++pi) {
      if (rep.nodes[pi].max.depth != depth - 1) continue;
      size_t j_prev = rep.nodes[pi].max.index_path.back();
      for (size_t j = 0; j < j_prev; ++j) {
        std::vector<size_t> path = rep.nodes[pi].max.index_path;
        path.push_back(j);
        long long Kj = ent[j].k;
        long long W = detect_window(opts.varsigma, opts.ln_lambda, std::llabs(Kj));
        int sgn = depth % 2 == 0 ? -1 : 1;  // (-1)^{depth-1}
        long long predicted = rep.nodes[pi].max.predicted + sgn * Kj;
        if (std::llabs(Kj) < radius ||
            predicted - W - radius < profile.n_lo ||
            predicted + W + radius > profile.n_hi) {
          rep.untestable.push_back(path);
          continue;
        }
        long long b = 0;
        bool found = nearest_maximum(profile, W, predicted, radius, &b);
        // nesting: a child outside its parent's window is no hierarchy node
        if (found &&
            std::llabs(b - rep.nodes[pi].max.position) >
                rep.nodes[pi].max.window) {
          found = false;
        }
        if (!found) {
          rep.missing.push_back(path);
          continue;
        }
        HierarchyNode node;
        node.max.position = b;
        node.max.window = W;
        node.max.depth = depth;
        node.max.index_path = path;
        node.max.predicted = predicted;
        node.max.deviation = std::llabs(b - predicted);
        node.parent = static_cast<long long>(pi);
        rep.nodes.push_back(node);
      }
    }
    level_begin = level_end;
  }

  for (auto& node : rep.nodes)
    node.similarity = reflective_similarity(profile, node.max, alpha, theta,
                                            opts, rep.k_hat_est);
  return rep;
}

SimilarityResult reflective_similarity(const SolutionProfile& profile,
                                       const LocalMaximum& node,
                                       const Frequency& alpha,
                                       const Phase& theta,
                                       const HierarchyOptions& opts,
                                       long long k_hat) {
  if (opts.ln_lambda <= 0) throw std::invalid_argument("ln_lambda must be > 0");
  SimilarityResult res;
  res.x_lo = static_cast<long long>(
      std::ceil(opts.c_lower * static_cast<double>(ipow(k_hat, node.depth))));
  res.x_lo = std::max<long long>(res.x_lo, 1);
  // similarity range is half the detection window: varsigma/(4 ln lambda) K
  res.x_hi = node.window / 2;
  if (res.x_lo > res.x_hi) return res;

  EnvelopeModel f(EnvelopeKind::f, alpha, theta, opts.ln_lambda);
  int sgn = node.reflection_sign();
  double base = profile.u_log(node.position);
  bool pass = true;
  for (long long ax = res.x_lo; ax <= res.x_hi; ++ax) {
    for (long long x : {ax, -ax}) {
      long long site = node.position + x;
      if (site < profile.n_lo || site > profile.n_hi) continue;
      double measured = profile.u_log(site) - base;
      double dev = std::fabs(measured - f.log_at(sgn * x));
      double dev_fl = std::fabs(measured - f.log_at(-sgn * x));
      res.tested = true;
      res.max_deviation = std::max(res.max_deviation, dev);
      res.max_deviation_flipped = std::max(res.max_deviation_flipped, dev_fl);
      if (dev > opts.eps * static_cast<double>(ax) + opts.c0_floor) pass = false;
    }
  }
  res.pass = res.tested && pass;
  return res;
}

}  // namespace amo
