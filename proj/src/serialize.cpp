#include "amo/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace amo {

std::string num_str(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string rational_string(const Rational& x) {
  return numerator(x).str() + "/" + denominator(x).str();
}

nlohmann::json to_json(const Frequency& alpha) {
  nlohmann::json j;
  j["value"] = rational_string(alpha.value);
  std::vector<std::string> coeffs;
  for (const Int& a : alpha.cf_coeffs) coeffs.push_back(a.str());
  j["cf_coeffs"] = coeffs;
  if (alpha.dio_params) {
    j["kappa"] = alpha.dio_params->first;
    j["tau"] = alpha.dio_params->second;
  }
  return j;
}

nlohmann::json to_json(const ResonanceSequence& seq) {
  nlohmann::json j;
  j["threshold"] = seq.threshold;
  j["fitted_gap_c"] = seq.fitted_gap_c;
  j["entries"] = nlohmann::json::array();
  for (const ResonanceEntry& e : seq.entries)
    j["entries"].push_back({{"k", e.k}, {"strength", e.strength}});
  return j;
}

nlohmann::json to_json(const Phase& theta) {
  nlohmann::json j;
  j["value"] = rational_string(theta.value);
  j["delta_hat"] = theta.delta_hat;
  j["excluded_flag"] = theta.excluded_flag;
  j["resonances"] = to_json(theta.resonances);
  return j;
}

nlohmann::json to_json(const BoundReport& rep) {
  nlohmann::json j;
  j["pass"] = rep.pass;
  j["epsilon"] = rep.epsilon;
  j["k_onset"] = rep.k_onset;
  j["n_max"] = rep.n_max;
  j["worst_upper_slack"] = rep.worst_upper;
  j["worst_lower_slack"] = rep.worst_lower;
  j["sites_checked"] = rep.sites.size();
  return j;
}

nlohmann::json to_json(const DensityStats& st) {
  return {{"limsup_slope", st.limsup_slope},
          {"liminf_slope", st.liminf_slope},
          {"exceptional_density", st.exceptional_density}};
}

nlohmann::json to_json(const HierarchyReport& rep) {
  nlohmann::json j;
  j["k0"] = rep.k0;
  j["k_hat_est"] = rep.k_hat_est;
  j["nodes"] = nlohmann::json::array();
  for (const HierarchyNode& node : rep.nodes) {
    nlohmann::json n;
    n["position"] = node.max.position;
    n["window"] = node.max.window;
    n["depth"] = node.max.depth;
    n["index_path"] = node.max.index_path;
    n["predicted"] = node.max.predicted;
    n["deviation"] = node.max.deviation;
    n["reflection_sign"] = node.max.reflection_sign();
    n["parent"] = node.parent;
    n["similarity"] = {{"tested", node.similarity.tested},
                       {"pass", node.similarity.pass},
                       {"max_deviation", node.similarity.max_deviation},
                       {"max_deviation_flipped", node.similarity.max_deviation_flipped},
                       {"x_lo", node.similarity.x_lo},
                       {"x_hi", node.similarity.x_hi}};
    j["nodes"].push_back(std::move(n));
  }
  j["untestable"] = rep.untestable;
  j["missing"] = rep.missing;
  return j;
}

nlohmann::json to_json(const PalindromeVerdict& verdict) {
  return {{"k_i", verdict.k_i},
          {"anchor", verdict.anchor},
          {"wronskian_sup", verdict.wronskian_sup},
          {"predicted_bound", verdict.predicted_bound},
          {"potential_defect", verdict.potential_defect},
          {"branch", verdict.branch == MidpointBranch::sum ? "sum" : "difference"},
          {"midpoint_norm", verdict.midpoint_norm},
          {"transport_gap", verdict.transport_gap},
          {"phi0_norm", verdict.phi0_norm}};
}

nlohmann::json to_json(const TransportReport& rep) {
  nlohmann::json j;
  j["vectors"] = rep.vectors;
  j["near_pairs"] = rep.near_pairs;
  j["symmetric_pairs"] = rep.symmetric_pairs;
  j["symmetric_fraction"] = rep.symmetric_fraction;
  j["decay_passes"] = rep.decay_passes;
  j["verdicts"] = nlohmann::json::array();
  for (const PalindromeVerdict& v : rep.verdicts) j["verdicts"].push_back(to_json(v));
  return j;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), width_(header.size()) {
  if (header.empty()) throw std::invalid_argument("csv header must be nonempty");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw std::invalid_argument("csv row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << cells[i];
  }
  os_ << '\n';
}

void write_bound_csv(std::ostream& os, const BoundReport& rep) {
  CsvWriter csv(os, {"site", "upper_slack", "lower_slack"});
  for (size_t i = 0; i < rep.sites.size(); ++i)
    csv.row({std::to_string(rep.sites[i]), num_str(rep.upper_slack[i]),
             num_str(rep.lower_slack[i])});
}

void write_hierarchy_csv(std::ostream& os, const HierarchyReport& rep) {
  CsvWriter csv(os, {"depth", "predicted", "position", "deviation", "window",
                     "reflection_sign", "similarity_tested", "similarity_pass",
                     "max_deviation", "max_deviation_flipped"});
  for (const HierarchyNode& node : rep.nodes)
    csv.row({std::to_string(node.max.depth), std::to_string(node.max.predicted),
             std::to_string(node.max.position), std::to_string(node.max.deviation),
             std::to_string(node.max.window),
             std::to_string(node.max.reflection_sign()),
             node.similarity.tested ? "1" : "0", node.similarity.pass ? "1" : "0",
             num_str(node.similarity.max_deviation),
             num_str(node.similarity.max_deviation_flipped)});
}

}  // namespace amo
