#ifndef AMO_SERIALIZE_HPP
#define AMO_SERIALIZE_HPP

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "amo/asymptotics.hpp"
#include "amo/hierarchy.hpp"
#include "amo/sctest.hpp"

namespace amo {

// 17 significant digits: round-trips any double
std::string num_str(double x);
// quotes a cell iff it contains a comma, quote, or newline
std::string csv_escape(const std::string& cell);
// exact "p/q" with arbitrary-size decimal integers
std::string rational_string(const Rational& x);

nlohmann::json to_json(const Frequency& alpha);
nlohmann::json to_json(const ResonanceSequence& seq);
nlohmann::json to_json(const Phase& theta);
nlohmann::json to_json(const BoundReport& rep);
nlohmann::json to_json(const DensityStats& st);
nlohmann::json to_json(const HierarchyReport& rep);
nlohmann::json to_json(const PalindromeVerdict& verdict);
nlohmann::json to_json(const TransportReport& rep);

// comma-separated, header row, LF endings, numbers via num_str
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  size_t width_;
};

void write_bound_csv(std::ostream& os, const BoundReport& rep);
void write_hierarchy_csv(std::ostream& os, const HierarchyReport& rep);

}  // namespace amo

#endif
