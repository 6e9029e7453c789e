#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>
#include <string>

#include "amo/experiment.hpp"

namespace {

struct CmdState {
  std::string config;
  // CLI overrides keyed by config-file key, applied after the config loads
  std::map<std::string, std::string> kv;
};

void add_common(CLI::App* cmd, CmdState& st) {
  cmd->add_option("--config", st.config, "config file, key = value lines");
  auto opt = [cmd, &st](const std::string& flag, const std::string& key,
                        const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&st, key](const std::string& v) { st.kv[key] = v; }, help);
  };
  opt("--out", "out", "output directory");
  opt("--seed", "seed", "rng seed for sampled checks");
  opt("--precision-bits", "precision_bits", "working precision in bits (>= 128)");
  opt("--threads", "threads", "worker pool size");
  opt("--alpha", "alpha", "frequency: golden | compatible | rational");
  opt("--alpha-value", "alpha_value", "explicit frequency p/q");
  opt("--theta", "theta", "explicit phase p/q (default: constructed)");
  opt("--delta", "delta", "target resonance strength, nats per site");
  opt("--k-list", "k_list", "resonance sites K_1,K_2,...");
  opt("--ln-lambda", "ln_lambda", "coupling ln lambda, nats");
  opt("--box", "box", "box size in sites");
  opt("--window", "window", "verification window in sites");
  opt("--eps", "eps", "envelope tolerance, nats per site");
  opt("--k-onset", "k_onset", "first site of the verification band");
  opt("--scan-k-max", "scan_k_max", "resonance scan depth");
  opt("--sweep-ln-lambda", "sweep_ln_lambda", "sweep grid ln lambda values");
  opt("--sweep-delta", "sweep_delta", "sweep grid delta targets");
  opt("--sweep-box", "sweep_box", "per-cell box size");
  opt("--sweep-vectors", "sweep_vectors", "per-cell eigenvector sample size");
}

int config_error(const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"type", "invalid_config"},
                                         {"message", message}}}}
                   .dump()
            << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"almost Mathieu operator laboratory"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    amo::ExperimentKind kind;
  };
  const Sub subs[] = {
      {"arith", "resonance analysis of (alpha, theta)", amo::ExperimentKind::arith},
      {"phase", "construct a phase with prescribed resonances", amo::ExperimentKind::arith},
      {"eigen", "eigenfunction decay envelope verification", amo::ExperimentKind::eigen},
      {"transfer", "transfer-matrix growth envelope verification", amo::ExperimentKind::transfer},
      {"hierarchy", "reflective hierarchical structure detection", amo::ExperimentKind::hierarchy},
      {"regime", "spectral regime classification with diagnostics", amo::ExperimentKind::regime},
      {"sweep", "phase-diagram sweep over (ln lambda, delta)", amo::ExperimentKind::sweep},
  };

  std::map<std::string, CmdState> states;
  std::map<std::string, amo::ExperimentKind> kinds;
  for (const Sub& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, states[s.name]);
    kinds[s.name] = s.kind;
  }
  unsigned long long selftest_seed = 1;
  CLI::App* self = app.add_subcommand("selftest", "structural invariants battery");
  self->add_option("--seed", selftest_seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  CLI::App* picked = app.get_subcommands().front();
  if (picked == self)
    return amo::selftest(selftest_seed, std::cout) == 0 ? 0 : 2;

  const std::string name = picked->get_name();
  CmdState& st = states[name];
  amo::ExperimentConfig cfg;
  try {
    if (!st.config.empty()) cfg = amo::ExperimentConfig::from_file(st.config);
    cfg.kind = kinds[name];
    for (const auto& [key, value] : st.kv) cfg.set(key, value);
  } catch (const std::exception& e) {
    return config_error(e.what());
  }
  return amo::run_experiment(cfg);
}
