#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "qcons/dynamics.hpp"

namespace qcons {

/// Long-format trace: header "k,i,x_num,x_den,floor_x", one row per node per
/// recorded iteration.
void write_trace_csv(std::ostream& os, std::span<const Snapshot> states);
/// Inverse of write_trace_csv; ParseError on malformed rows or missing nodes.
std::vector<Snapshot> read_trace_csv(std::istream& is);

/// {kind, k0, level} | {kind, t_conv, period} | {kind, iterations}; levels are "p/q" strings.
nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

}  // namespace qcons
