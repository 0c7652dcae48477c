#ifndef MTDS_REPORT_HPP
#define MTDS_REPORT_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

namespace mtds {

// Deterministic JSON emission: key order preserved, every floating-point
// number printed with %.17g (lossless binary64 round trip), two-space
// indentation. parse(emit(x)) then emit again is byte-identical.
void emit_json(std::ostream& os, const nlohmann::ordered_json& j, int indent = 0);

std::string json_to_string(const nlohmann::ordered_json& j);

nlohmann::ordered_json parse_json_file(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::ordered_json& j);

} // namespace mtds

#endif
