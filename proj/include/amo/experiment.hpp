#ifndef AMO_EXPERIMENT_HPP
#define AMO_EXPERIMENT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "amo/numeric.hpp"

namespace amo {

enum class ExperimentKind { arith, eigen, transfer, hierarchy, regime, sweep };

const char* kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);

// Flat key = value config ('#' and ';' comments). Every field has a default
// and is echoed into the output manifest.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::arith;

  // frequency: "golden" (deep Fibonacci convergent), "compatible" (assembled
  // to carry the k_list resonances), or "rational" with alpha_value = "p/q"
  std::string alpha_kind = "golden";
  std::string alpha_value;
  int cf_depth = 128;

  // phase: explicit theta_value = "p/q", or constructed from (delta, k_list)
  std::string theta_value;
  double delta_target = 0.5;
  std::vector<long long> k_list{20};

  double ln_lambda = 1.0;
  long long box = 2400;
  long long window = 800;
  double eps = 0.15;
  long long k_onset = 40;
  unsigned precision = 256;
  long long scan_k_max = 200;
  std::string out_dir = "amo-out";
  unsigned long long seed = 1;
  int threads = 2;

  std::vector<double> sweep_ln_lambda{0.3, 0.6, 1.2};
  std::vector<double> sweep_delta{0.1, 0.5, 0.9};
  long long sweep_box = 240;
  int sweep_vectors = 12;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_stream(std::istream& is);
  // single key = value assignment; unknown keys throw std::invalid_argument
  void set(const std::string& key, const std::string& value);
  void validate() const;
  nlohmann::json echo() const;
};

enum class Regime { localized, singular_continuous, subcritical };

const char* regime_name(Regime regime);

// Sharp-transition classification: localized for ln lambda > delta_hat,
// singular continuous for 0 < ln lambda < delta_hat, subcritical for
// ln lambda < 0. Exact ties are refused rather than broken arbitrarily.
Regime classify(double ln_lambda, double delta_hat);

struct RegimeVerdict {
  double ln_lambda = 0;
  double delta_hat = 0;
  long long resonance_k = 0;  // K_1 carrying the measured delta_hat; 0 if none
  Regime classification = Regime::subcritical;
  double decay_pass_rate = -1;   // fraction of near-center eigenvectors
                                 // decaying at the localized rate; -1 = not
                                 // measured
  double palindrome_rate = -1;   // symmetric fraction from sc_transport_check
  bool diagnostics_match = false;
  std::string error;             // nonempty: the cell failed, fields above
                                 // reflect whatever was computed before that
};

nlohmann::json to_json(const RegimeVerdict& verdict);

struct SweepCell {
  double ln_lambda = 0;
  double delta_target = 0;
};

// One verdict per cell, in grid order regardless of completion order; cells
// run concurrently (worker pool of base.threads) and per-cell failures are
// recorded in-row, never thrown.
std::vector<RegimeVerdict> sweep_phase_diagram(const std::vector<SweepCell>& grid,
                                               const ExperimentConfig& base);

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& grid,
                     const std::vector<RegimeVerdict>& rows);

// Runs the configured experiment, writing manifest.json, report.json and the
// kind's CSV artifacts under config.out_dir. Returns 0 on pass, 2 on
// verification failure, 1 on error (with a machine-readable error JSON line
// on standard error).
int run_experiment(const ExperimentConfig& config);

// Structural invariants battery over randomized instances; returns the
// number of failed checks.
int selftest(unsigned long long seed, std::ostream& log);

}  // namespace amo

#endif
