#include "amo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "amo/hierarchy.hpp"
#include "amo/sctest.hpp"
#include "amo/serialize.hpp"

namespace fs = std::filesystem;

namespace amo {

namespace {

constexpr const char* tool_version = "0.1.0";

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long to_ll(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

double to_d(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& v, const std::string& key, F parse) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse(item, key));
  }
  return out;
}

Rational parse_rational(const std::string& v, const std::string& key) {
  try {
    return Rational(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad rational for " + key + ": " + v);
  }
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::arith: return "arith";
    case ExperimentKind::eigen: return "eigen";
    case ExperimentKind::transfer: return "transfer";
    case ExperimentKind::hierarchy: return "hierarchy";
    case ExperimentKind::regime: return "regime";
    case ExperimentKind::sweep: return "sweep";
  }
  return "?";
}

ExperimentKind kind_from_name(const std::string& name) {
  for (ExperimentKind k : {ExperimentKind::arith, ExperimentKind::eigen,
                           ExperimentKind::transfer, ExperimentKind::hierarchy,
                           ExperimentKind::regime, ExperimentKind::sweep})
    if (name == kind_name(k)) return k;
  throw std::invalid_argument("config: unknown experiment kind: " + name);
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "kind") kind = kind_from_name(value);
  else if (key == "alpha") alpha_kind = value;
  else if (key == "alpha_value") alpha_value = value;
  else if (key == "cf_depth") cf_depth = static_cast<int>(to_ll(value, key));
  else if (key == "theta") theta_value = value;
  else if (key == "delta") delta_target = to_d(value, key);
  else if (key == "k_list") k_list = parse_list<long long>(value, key, to_ll);
  else if (key == "ln_lambda") ln_lambda = to_d(value, key);
  else if (key == "box") box = to_ll(value, key);
  else if (key == "window") window = to_ll(value, key);
  else if (key == "eps") eps = to_d(value, key);
  else if (key == "k_onset") k_onset = to_ll(value, key);
  else if (key == "precision_bits") precision = static_cast<unsigned>(to_ll(value, key));
  else if (key == "scan_k_max") scan_k_max = to_ll(value, key);
  else if (key == "out") out_dir = value;
  else if (key == "seed") seed = static_cast<unsigned long long>(to_ll(value, key));
  else if (key == "threads") threads = static_cast<int>(to_ll(value, key));
  else if (key == "sweep_ln_lambda") sweep_ln_lambda = parse_list<double>(value, key, to_d);
  else if (key == "sweep_delta") sweep_delta = parse_list<double>(value, key, to_d);
  else if (key == "sweep_box") sweep_box = to_ll(value, key);
  else if (key == "sweep_vectors") sweep_vectors = static_cast<int>(to_ll(value, key));
  else throw std::invalid_argument("config: unknown key: " + key);
}

ExperimentConfig ExperimentConfig::from_stream(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  return from_stream(is);
}

void ExperimentConfig::validate() const {
  if (precision < 128) throw std::invalid_argument("precision below 128 bits");
  if (box < 10) throw std::invalid_argument("box too small");
  if (window < 2) throw std::invalid_argument("window too small");
  if (3 * window > 2 * box) throw std::invalid_argument("window exceeds box budget");
  if (k_onset < 1 || window / 2 <= k_onset)
    throw std::invalid_argument("window does not reach past the onset");
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (!(delta_target > 0)) throw std::invalid_argument("delta must be positive");
  if (cf_depth < 1) throw std::invalid_argument("cf_depth must be positive");
  if (scan_k_max < 1) throw std::invalid_argument("scan_k_max must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  if (alpha_kind != "golden" && alpha_kind != "compatible" && alpha_kind != "rational")
    throw std::invalid_argument("unknown alpha kind: " + alpha_kind);
  if (alpha_kind == "rational" && alpha_value.empty())
    throw std::invalid_argument("alpha = rational requires alpha_value");
  if (kind == ExperimentKind::sweep) {
    if (sweep_ln_lambda.empty() || sweep_delta.empty())
      throw std::invalid_argument("sweep grid is empty");
    if (sweep_box < 80) throw std::invalid_argument("sweep_box too small");
    if (sweep_vectors < 1) throw std::invalid_argument("sweep_vectors must be positive");
  }
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  j["alpha"] = alpha_kind;
  j["alpha_value"] = alpha_value;
  j["cf_depth"] = cf_depth;
  j["theta"] = theta_value;
  j["delta"] = delta_target;
  j["k_list"] = k_list;
  j["ln_lambda"] = ln_lambda;
  j["box"] = box;
  j["window"] = window;
  j["eps"] = eps;
  j["k_onset"] = k_onset;
  j["precision_bits"] = precision;
  j["scan_k_max"] = scan_k_max;
  j["out"] = out_dir;
  j["seed"] = seed;
  j["threads"] = threads;
  j["sweep_ln_lambda"] = sweep_ln_lambda;
  j["sweep_delta"] = sweep_delta;
  j["sweep_box"] = sweep_box;
  j["sweep_vectors"] = sweep_vectors;
  return j;
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::localized: return "localized";
    case Regime::singular_continuous: return "singular_continuous";
    case Regime::subcritical: return "subcritical";
  }
  return "?";
}

Regime classify(double ln_lambda, double delta_hat) {
  if (delta_hat < 0) throw std::invalid_argument("classify: delta_hat < 0");
  if (ln_lambda < 0) return Regime::subcritical;
  if (ln_lambda > delta_hat) return Regime::localized;
  if (ln_lambda > 0 && ln_lambda < delta_hat) return Regime::singular_continuous;
  throw InvalidRegimeError("classification tie: ln lambda on a regime boundary");
}

nlohmann::json to_json(const RegimeVerdict& verdict) {
  return {{"ln_lambda", verdict.ln_lambda},
          {"delta_hat", verdict.delta_hat},
          {"resonance_k", verdict.resonance_k},
          {"classification", regime_name(verdict.classification)},
          {"decay_pass_rate", verdict.decay_pass_rate},
          {"palindrome_rate", verdict.palindrome_rate},
          {"diagnostics_match", verdict.diagnostics_match},
          {"error", verdict.error}};
}

namespace {

Frequency resolve_alpha(const ExperimentConfig& cfg) {
  if (cfg.alpha_kind == "golden")
    return Frequency::from_rational(Rational(46368, 75025), cfg.cf_depth);
  if (cfg.alpha_kind == "compatible")
    return compatible_frequency(cfg.delta_target, cfg.k_list);
  return Frequency::from_rational(frac(parse_rational(cfg.alpha_value, "alpha_value")),
                                  cfg.cf_depth);
}

Phase resolve_phase(const ExperimentConfig& cfg, const Frequency& alpha) {
  if (!cfg.theta_value.empty()) {
    Phase ph;
    ph.value = frac(parse_rational(cfg.theta_value, "theta"));
    ph.resonances =
        find_resonances(alpha, ph, 0.75 * cfg.delta_target, cfg.scan_k_max);
    ph.delta_hat =
        resonance_exponent(ResonanceMode::delta, alpha, &ph, cfg.scan_k_max).estimate;
    return ph;
  }
  return construct_phase(alpha, cfg.delta_target, cfg.k_list, cfg.scan_k_max);
}

Real default_tol() {
  return pow(Real(2), 56 - static_cast<long long>(precision_bits()));
}

// eigenvector anchored near the box center: the energy window around the
// center site term widens in annuli (no eigenvalue is profiled twice),
// visiting candidates in order of spectral distance from the site term. In
// nearest mode the first anchor within max_dist wins -- the spectrally
// central state, whose well pair has a well-defined perturbative splitting.
// Otherwise the search keeps going until an anchor within 1 site appears, or
// the window is exhausted and the smallest anchor within max_dist wins.
SolutionProfile centered_profile(const OperatorParams& params, long long n_half,
                                 long long max_dist, bool nearest = false) {
  BoxSpec box{-n_half, n_half};
  double e0 = params.site_term(0).convert_to<double>();
  double full = 2.0 + 2.0 * std::exp(params.ln_lambda) + 0.5;
  double inner = 0.0;
  double radius = 0.2;
  bool have = false;
  SolutionProfile best;
  while (true) {
    std::vector<Real> evs = box_eigenvalues(
        params, box, Real(e0 - radius), Real(e0 - inner), default_tol());
    std::vector<Real> hi = box_eigenvalues(
        params, box, Real(e0 + inner), Real(e0 + radius), default_tol());
    evs.insert(evs.end(), hi.begin(), hi.end());
    std::sort(evs.begin(), evs.end(), [&](const Real& a, const Real& b) {
      return abs(a - e0) < abs(b - e0);
    });
    for (const Real& e : evs) {
      SolutionProfile pr;
      try {
        pr = eigenvector_profile(params, box, e);
      } catch (const IllConditionedEigenpairError&) {
        continue;
      }
      if (std::llabs(pr.anchor) > max_dist) continue;
      if (nearest) return pr;
      if (!have || std::llabs(pr.anchor) < std::llabs(best.anchor)) {
        best = pr;
        have = true;
        if (std::llabs(best.anchor) <= 1) break;
      }
    }
    if (have && std::llabs(best.anchor) <= 1) return best;
    bool covered = e0 - radius <= -full && e0 + radius >= full;
    if (covered || (have && radius >= 3.2)) {
      if (have) return best;
      throw Error("no eigenvector anchored within " + std::to_string(max_dist) +
                  " sites of the box center");
    }
    inner = radius;
    radius *= 2;
  }
}

SolutionProfile slice_profile(const SolutionProfile& pr, long long lo, long long hi) {
  if (lo < pr.n_lo || hi > pr.n_hi || lo > hi)
    throw std::invalid_argument("slice outside the profile window");
  SolutionProfile out;
  out.n_lo = lo;
  out.n_hi = hi;
  out.anchor = pr.anchor;
  out.energy = pr.energy;
  out.residual = pr.residual;
  out.degenerate_flag = pr.degenerate_flag;
  for (long long n = lo; n <= hi; ++n) {
    out.sign.push_back(pr.phi_sign(n));
    out.logmag_phi.push_back(pr.phi_log(n));
    out.logU.push_back(pr.u_log(n));
  }
  return out;
}

// phase as seen from site a; resonance metadata is left stale on purpose,
// envelope models only read the value
Phase shifted_phase(const OperatorParams& params, long long a) {
  Phase sh = params.theta;
  sh.value = frac(params.theta.value + Rational(a) * params.alpha.value);
  return sh;
}

struct DecaySample {
  int sampled = 0;
  int passes = 0;

  double rate() const {
    return sampled ? static_cast<double>(passes) / sampled : -1.0;
  }
};

// Decay test: eigenvectors anchored near the phase-resonant site 0, where the
// engineered resonance is active, must decay at the localized rate
// ln lambda - delta_hat within a factor-2 allowance (floored at ln lambda / 4
// so the threshold stays a genuine decay requirement near the critical line).
// In the singular-continuous regime the palindromic return at the resonance
// site holds the profile near full height and the threshold is violated.
DecaySample envelope_decay_sample(const OperatorParams& params, long long n_half,
                                  int max_vectors, long long onset,
                                  long long n_check) {
  // The well energies drift O(1) from the site terms at weak coupling, so the
  // near-center family cannot be targeted by energy; a full scan of a small
  // sub-box is cheap and finds every anchor.
  long long sub = std::min(n_half, 2 * n_check);
  BoxSpec box{-sub, sub};
  double rho = std::max((params.ln_lambda - params.theta.delta_hat) / 2,
                        params.ln_lambda / 4);
  double full = 2.0 + 2.0 * std::exp(params.ln_lambda) + 0.5;
  DecaySample out;
  std::vector<Real> evs =
      box_eigenvalues(params, box, Real(-full), Real(full), default_tol());
  for (const Real& e : evs) {
    if (out.sampled >= max_vectors) break;
    SolutionProfile pr;
    try {
      pr = eigenvector_profile(params, box, e);
    } catch (const IllConditionedEigenpairError&) {
      continue;
    }
    long long a = pr.anchor;
    if (std::llabs(a) > 2) continue;
    if (std::min(a - pr.n_lo, pr.n_hi - a) < n_check) continue;
    ++out.sampled;
    bool ok = true;
    for (long long l = onset; l <= n_check && ok; ++l)
      ok = pr.u_log(a + l) - pr.u_log(a) <= -rho * static_cast<double>(l) &&
           pr.u_log(a - l) - pr.u_log(a) <= -rho * static_cast<double>(l);
    if (ok) ++out.passes;
  }
  return out;
}

// Smallest resonance site >= 20 whose target norm e^{-delta k} clears the
// finite-scan noise floor min(1/(4k^2), 1/(4 K_max)) with a factor-2 margin;
// small delta needs a deep site before the resonance is detectable at all.
long long resonance_site_for(double delta) {
  for (long long k = 20; k <= 4000; ++k) {
    double dk = delta * static_cast<double>(k);
    double shift = std::min(0.5 * std::log(M_PI), 0.05 * dk);
    double floor_v = 0.5 * std::min(1.0 / (4.0 * static_cast<double>(k) * k),
                                    1.0 / (4.0 * std::max<double>(200.0, 2.0 * k)));
    if (-dk - shift <= std::log(floor_v)) return k;
  }
  throw std::invalid_argument("delta too small for a detectable resonance");
}

// diagnostics shared by the regime kind and sweep cells; params must carry a
// resolved phase
RegimeVerdict diagnose(const OperatorParams& params, long long n_half,
                       int max_vectors) {
  RegimeVerdict v;
  v.ln_lambda = params.ln_lambda;
  v.delta_hat = params.theta.delta_hat;
  if (!params.theta.resonances.entries.empty())
    v.resonance_k = params.theta.resonances.entries.front().k;
  v.classification = classify(v.ln_lambda, v.delta_hat);

  long long onset = 15;
  long long n_check =
      std::min(n_half / 2, std::llabs(v.resonance_k) + 2 * onset);
  auto ds = envelope_decay_sample(params, n_half, max_vectors, onset, n_check);
  v.decay_pass_rate = ds.rate();

  switch (v.classification) {
    case Regime::localized:
      v.diagnostics_match = v.decay_pass_rate >= 0.9;
      break;
    case Regime::singular_continuous: {
      long long fold_half =
          std::max<long long>(std::llabs(v.resonance_k) / 2 + 20, 40);
      auto rep = sc_transport_check(params, fold_half,
                                    std::max(max_vectors, 20));
      v.palindrome_rate = rep.symmetric_fraction;
      v.diagnostics_match =
          v.decay_pass_rate <= 0.1 && v.palindrome_rate >= 0.8;
      break;
    }
    case Regime::subcritical:
      v.diagnostics_match = true;  // out of scope, reported only
      break;
  }
  return v;
}

RegimeVerdict evaluate_cell(const ExperimentConfig& base, double ln_lambda,
                            double delta) {
  set_precision_bits(base.precision);
  RegimeVerdict v;
  v.ln_lambda = ln_lambda;
  try {
    long long k1 = resonance_site_for(delta);
    OperatorParams p;
    p.alpha = Frequency::from_rational(Rational(46368, 75025), base.cf_depth);
    p.theta = construct_phase(p.alpha, delta, {k1},
                              std::max<long long>(200, 2 * k1));
    p.ln_lambda = ln_lambda;
    v = diagnose(p, base.sweep_box / 2, base.sweep_vectors);
  } catch (const std::exception& e) {
    v.error = e.what();
  }
  return v;
}

}  // namespace

std::vector<RegimeVerdict> sweep_phase_diagram(const std::vector<SweepCell>& grid,
                                               const ExperimentConfig& base) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  int workers = std::max(1, base.threads);
  std::vector<RegimeVerdict> rows(grid.size());
  for (size_t i0 = 0; i0 < grid.size(); i0 += static_cast<size_t>(workers)) {
    size_t i1 = std::min(grid.size(), i0 + static_cast<size_t>(workers));
    std::vector<std::future<RegimeVerdict>> futs;
    for (size_t i = i0; i < i1; ++i)
      futs.push_back(std::async(std::launch::async, [&base, &grid, i] {
        return evaluate_cell(base, grid[i].ln_lambda, grid[i].delta_target);
      }));
    for (size_t i = i0; i < i1; ++i) rows[i] = futs[i - i0].get();
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& grid,
                     const std::vector<RegimeVerdict>& rows) {
  if (grid.size() != rows.size())
    throw std::invalid_argument("sweep grid/row size mismatch");
  CsvWriter csv(os, {"ln_lambda", "delta_target", "resonance_k", "delta_hat",
                     "classification", "decay_pass_rate", "palindrome_rate",
                     "diagnostics_match", "error"});
  for (size_t i = 0; i < rows.size(); ++i) {
    const RegimeVerdict& v = rows[i];
    csv.row({num_str(grid[i].ln_lambda), num_str(grid[i].delta_target),
             std::to_string(v.resonance_k), num_str(v.delta_hat),
             v.error.empty() ? regime_name(v.classification) : "",
             num_str(v.decay_pass_rate), num_str(v.palindrome_rate),
             v.diagnostics_match ? "1" : "0", csv_escape(v.error)});
  }
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

struct RunOutput {
  bool pass = false;
  nlohmann::json report;
  nlohmann::json measured;
};

RunOutput run_arith(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  Frequency alpha = resolve_alpha(cfg);
  auto beta = resonance_exponent(ResonanceMode::beta, alpha, nullptr, cfg.scan_k_max);
  Phase theta = resolve_phase(cfg, alpha);
  ro.report["alpha"] = to_json(alpha);
  ro.report["theta"] = to_json(theta);
  ro.report["beta_hat"] = beta.estimate;
  ro.report["beta_argmax_k"] = beta.argmax_k;
  std::ostringstream csv;
  {
    CsvWriter w(csv, {"k", "strength"});
    for (const ResonanceEntry& e : theta.resonances.entries)
      w.row({std::to_string(e.k), num_str(e.strength)});
  }
  write_text(out / "resonances.csv", csv.str());
  ro.measured["beta_hat"] = beta.estimate;
  ro.measured["delta_hat"] = theta.delta_hat;
  ro.pass = true;
  return ro;
}

RunOutput run_eigen(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  OperatorParams p;
  p.alpha = resolve_alpha(cfg);
  p.theta = resolve_phase(cfg, p.alpha);
  p.ln_lambda = cfg.ln_lambda;
  SolutionProfile pr = centered_profile(p, cfg.box / 2, 5, true);
  p.energy = pr.energy;
  long long half = cfg.window / 2;
  SolutionProfile cut = slice_profile(pr, pr.anchor - half, pr.anchor + half);
  EnvelopeModel f(EnvelopeKind::f, p.alpha, shifted_phase(p, pr.anchor),
                  p.ln_lambda);
  BoundReport rep = verify_bounds(cut, f, cfg.eps, cfg.k_onset);
  ro.report["anchor"] = pr.anchor;
  ro.report["energy"] = pr.energy.convert_to<double>();
  ro.report["residual"] = pr.residual;
  ro.report["theta"] = to_json(p.theta);
  ro.report["bound"] = to_json(rep);
  std::ostringstream slacks, profile;
  write_bound_csv(slacks, rep);
  {
    CsvWriter w(profile, {"site", "sign", "log_phi", "log_U"});
    for (long long n = cut.n_lo; n <= cut.n_hi; ++n)
      w.row({std::to_string(n), std::to_string(cut.phi_sign(n)),
             num_str(cut.phi_log(n)), num_str(cut.u_log(n))});
  }
  write_text(out / "slacks.csv", slacks.str());
  write_text(out / "profile.csv", profile.str());
  ro.measured["delta_hat"] = p.theta.delta_hat;
  ro.measured["onset_k"] = cfg.k_onset;
  ro.measured["worst_upper_slack"] = rep.worst_upper;
  ro.measured["worst_lower_slack"] = rep.worst_lower;
  ro.pass = rep.pass;
  return ro;
}

RunOutput run_transfer(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  OperatorParams p;
  p.alpha = resolve_alpha(cfg);
  p.theta = resolve_phase(cfg, p.alpha);
  p.ln_lambda = cfg.ln_lambda;
  SolutionProfile pr = centered_profile(p, cfg.box / 2, 5, true);
  p.energy = pr.energy;
  long long half = cfg.window / 2;
  std::vector<double> tn = transfer_norm_profile(p, half);
  EnvelopeModel g(EnvelopeKind::g, p.alpha, p.theta, p.ln_lambda);
  BoundReport rep = verify_bounds(tn, 1, g, cfg.eps, cfg.k_onset);

  // Last-Simon sandwich: the solution orthogonal to the decaying direction
  // carries the full transfer norm up to 3 nats
  LogVec2 u_perp;
  u_perp.v[0] = Real(-pr.phi_sign(pr.anchor - 1)) * exp(Real(pr.phi_log(pr.anchor - 1)));
  u_perp.v[1] = Real(pr.phi_sign(pr.anchor)) * exp(Real(pr.phi_log(pr.anchor)));
  u_perp.renormalize();
  OperatorParams ps = p;
  ps.theta = shifted_phase(p, pr.anchor);
  std::vector<double> tns = transfer_norm_profile(ps, half);
  SolutionProfile sol = solution_profile(ps, u_perp, half);
  double sandwich = 0;
  for (long long l = 1; l <= half; ++l)
    sandwich = std::max(sandwich, tns[static_cast<size_t>(l - 1)] -
                                      (sol.u_log(l) - sol.u_log(0)));

  ro.report["bound"] = to_json(rep);
  ro.report["last_simon_gap"] = sandwich;
  std::ostringstream csv;
  {
    EnvelopeModel gm(EnvelopeKind::g, p.alpha, p.theta, p.ln_lambda);
    CsvWriter w(csv, {"l", "log_norm", "g_model"});
    for (long long l = 1; l <= half; ++l)
      w.row({std::to_string(l), num_str(tn[static_cast<size_t>(l - 1)]),
             num_str(gm.log_at(l))});
  }
  write_text(out / "transfer.csv", csv.str());
  ro.measured["delta_hat"] = p.theta.delta_hat;
  ro.measured["onset_k"] = cfg.k_onset;
  ro.measured["last_simon_gap"] = sandwich;
  ro.pass = rep.pass && sandwich <= 3.0;
  return ro;
}

RunOutput run_hierarchy(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  OperatorParams p;
  p.alpha = resolve_alpha(cfg);
  p.theta = resolve_phase(cfg, p.alpha);
  p.ln_lambda = cfg.ln_lambda;
  SolutionProfile pr = centered_profile(p, cfg.box / 2, 5);
  p.energy = pr.energy;
  HierarchyOptions opts;
  opts.varsigma = p.theta.resonances.threshold;
  opts.ln_lambda = cfg.ln_lambda;
  opts.eps = cfg.eps;
  HierarchyReport rep = build_hierarchy(pr, p.theta.resonances, p.alpha, p.theta, opts);
  bool pass = !rep.nodes.empty() && rep.missing.empty();
  for (const HierarchyNode& node : rep.nodes)
    if (node.similarity.tested &&
        !(node.similarity.pass &&
          node.similarity.max_deviation < node.similarity.max_deviation_flipped))
      pass = false;
  ro.report["hierarchy"] = to_json(rep);
  std::ostringstream csv;
  write_hierarchy_csv(csv, rep);
  write_text(out / "hierarchy.csv", csv.str());
  ro.measured["delta_hat"] = p.theta.delta_hat;
  ro.measured["k_hat_est"] = rep.k_hat_est;
  ro.measured["k0"] = rep.k0;
  ro.pass = pass;
  return ro;
}

RunOutput run_regime(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  OperatorParams p;
  p.alpha = resolve_alpha(cfg);
  p.theta = resolve_phase(cfg, p.alpha);
  p.ln_lambda = cfg.ln_lambda;
  RegimeVerdict v = diagnose(p, cfg.box / 2, cfg.sweep_vectors);
  ro.report["verdict"] = to_json(v);
  std::ostringstream csv;
  write_sweep_csv(csv, {{cfg.ln_lambda, cfg.delta_target}}, {v});
  write_text(out / "regime.csv", csv.str());
  ro.measured["delta_hat"] = v.delta_hat;
  ro.measured["decay_pass_rate"] = v.decay_pass_rate;
  ro.measured["palindrome_rate"] = v.palindrome_rate;
  ro.pass = v.diagnostics_match;
  return ro;
}

RunOutput run_sweep(const ExperimentConfig& cfg, const fs::path& out) {
  RunOutput ro;
  std::vector<SweepCell> grid;
  for (double ll : cfg.sweep_ln_lambda)
    for (double d : cfg.sweep_delta) grid.push_back({ll, d});
  std::vector<RegimeVerdict> rows = sweep_phase_diagram(grid, cfg);
  std::ostringstream csv;
  write_sweep_csv(csv, grid, rows);
  write_text(out / "sweep.csv", csv.str());
  ro.report["rows"] = nlohmann::json::array();
  bool pass = true;
  for (const RegimeVerdict& v : rows) {
    ro.report["rows"].push_back(to_json(v));
    if (!v.error.empty() || !v.diagnostics_match) pass = false;
  }
  ro.measured["cells"] = rows.size();
  ro.pass = pass;
  return ro;
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  try {
    config.validate();
    set_precision_bits(config.precision);
    fs::path out(config.out_dir);
    fs::create_directories(out);

    RunOutput ro;
    switch (config.kind) {
      case ExperimentKind::arith: ro = run_arith(config, out); break;
      case ExperimentKind::eigen: ro = run_eigen(config, out); break;
      case ExperimentKind::transfer: ro = run_transfer(config, out); break;
      case ExperimentKind::hierarchy: ro = run_hierarchy(config, out); break;
      case ExperimentKind::regime: ro = run_regime(config, out); break;
      case ExperimentKind::sweep: ro = run_sweep(config, out); break;
    }

    nlohmann::json manifest;
    manifest["tool"] = {{"name", "amolab"}, {"version", tool_version}};
    manifest["config"] = config.echo();
    manifest["tolerances"] = {{"eps", config.eps},
                              {"k_onset", config.k_onset},
                              {"precision_bits", config.precision},
                              {"scan_k_max", config.scan_k_max}};
    manifest["measured"] = ro.measured;
    manifest["pass"] = ro.pass;
    ro.report["pass"] = ro.pass;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    write_text(out / "report.json", ro.report.dump(2) + "\n");
    return ro.pass ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "invalid_config"},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "domain_error"},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", {{"type", "internal_error"},
                                           {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  }
}

int selftest(unsigned long long seed, std::ostream& os) {
  std::mt19937_64 rng(seed);
  int failures = 0;
  auto check = [&](bool ok, const std::string& name) {
    os << (ok ? "pass  " : "FAIL  ") << name << "\n";
    if (!ok) ++failures;
  };

  // torus-norm exactness on random rationals
  {
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      long long num = static_cast<long long>(rng() % 20001) - 10000;
      long long den = 1 + static_cast<long long>(rng() % 9999);
      Rational x(num, den);
      long long shift = static_cast<long long>(rng() % 21) - 10;
      if (torus_norm(x) != torus_norm(x + shift)) ok = false;
      if (torus_norm(x) != torus_norm(-x)) ok = false;
      if (torus_norm(x) > Rational(1, 2)) ok = false;
      if (torus_norm(x) != abs(signed_frac(x))) ok = false;
    }
    check(ok, "torus norm exactness");
  }

  // convergents are best approximations
  {
    Frequency a = Frequency::from_rational(Rational(4181, 6765));
    bool ok = !a.convergents.empty();
    for (const auto& [pc, qc] : a.convergents) {
      if (qc > 300) break;
      Rational best = torus_norm(Rational(qc) * a.value);
      for (Int q = 1; q < qc; ++q)
        if (torus_norm(Rational(q) * a.value) <= best) ok = false;
    }
    check(ok, "convergent best approximation");
  }

  std::uniform_real_distribution<double> lam(0.2, 1.2), en(-2.0, 2.0);
  for (int inst = 0; inst < 4; ++inst) {
    OperatorParams p;
    p.alpha = Frequency::from_rational(Rational(4181, 6765));
    p.theta.value = Rational(1 + static_cast<long long>(rng() % 997), 1009);
    p.ln_lambda = lam(rng);
    p.energy = Real(en(rng));
    std::string tag = " (instance " + std::to_string(inst) + ")";

    // cocycle composition A_{k+m} = A_k(. + m alpha) A_m
    {
      long long k = 5 + static_cast<long long>(rng() % 30);
      long long m = 3 + static_cast<long long>(rng() % 20);
      LogMat2 whole = transfer_product(p, k + m);
      LogMat2 split = matmul(transfer_product(p, k, m), transfer_product(p, m));
      bool ok = true;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double a_log = whole.log_scale +
                         log(abs(whole.m[i][j])).convert_to<double>();
          double b_log = split.log_scale +
                         log(abs(split.m[i][j])).convert_to<double>();
          if (std::fabs(a_log - b_log) > 1e-9) ok = false;
          if (whole.m[i][j] * split.m[i][j] < 0) ok = false;
        }
      check(ok, "cocycle composition" + tag);
    }

    // det A_k = 1
    {
      long long k = 10 + static_cast<long long>(rng() % 60);
      LogMat2 A = transfer_product(p, k);
      Real det = A.m[0][0] * A.m[1][1] - A.m[0][1] * A.m[1][0];
      double logdet = 2.0 * A.log_scale + log(abs(det)).convert_to<double>();
      check(det > 0 && std::fabs(logdet) <= 1e-6, "det A_k = 1" + tag);
    }

    // transfer entries vs determinants (Green/transfer entry identity)
    {
      long long k = 4 + static_cast<long long>(rng() % 40);
      LogMat2 A = transfer_product(p, k);
      auto P0 = determinant_logs(p, k, 0);
      auto P1 = determinant_logs(p, k, 1);
      struct Want { int i, j, flip; SignLog v; };
      Want want[] = {{0, 0, 1, P0[static_cast<size_t>(k)]},
                     {1, 0, 1, P0[static_cast<size_t>(k - 1)]},
                     {0, 1, -1, P1[static_cast<size_t>(k - 1)]},
                     {1, 1, -1, P1[static_cast<size_t>(k - 2)]}};
      bool ok = true;
      for (const Want& w : want) {
        double got = A.log_scale + log(abs(A.m[w.i][w.j])).convert_to<double>();
        int got_sign = A.m[w.i][w.j] > 0 ? 1 : (A.m[w.i][w.j] < 0 ? -1 : 0);
        if (w.v.sign == 0) {
          if (got > -200.0 + A.log_scale && got_sign != 0) ok = false;
          continue;
        }
        if (got_sign != w.flip * w.v.sign) ok = false;
        if (std::fabs(got - w.v.log) > 1e-8 * std::max(1.0, std::fabs(w.v.log)))
          ok = false;
      }
      check(ok, "transfer entry identity" + tag);
    }

    // Wronskian constancy of two independent solutions; the window is kept
    // short so the e^{2 gamma N} product growth stays within double-log
    // cancellation resolution for any energy in the sampled range
    {
      OperatorParams pw = p;
      pw.ln_lambda = 0.2 + 0.4 * (pw.ln_lambda - 0.2);
      LogVec2 a, b;
      a.v[0] = Real(1);
      a.v[1] = Real(0);
      b.v[0] = Real(en(rng));
      b.v[1] = Real(1);
      auto ua = solution_profile(pw, a, 4);
      auto ub = solution_profile(pw, b, 4);
      std::vector<SignLog> sa, sb;
      for (long long n = -4; n <= 4; ++n) {
        sa.push_back({ua.phi_sign(n), ua.phi_log(n)});
        sb.push_back({ub.phi_sign(n), ub.phi_log(n)});
      }
      auto w = wronskian_profile(sa, sb);
      double lo = 1e300, hi = -1e300;
      bool ok = true;
      for (const SignLog& x : w) {
        if (x.sign != w.front().sign) ok = false;
        lo = std::min(lo, x.log);
        hi = std::max(hi, x.log);
      }
      check(ok && hi - lo <= 1e-5, "Wronskian constancy" + tag);
    }
  }

  os << (failures == 0 ? "selftest: all checks passed"
                        : "selftest: " + std::to_string(failures) + " failed")
      << "\n";
  return failures;
}

}  // namespace amo
