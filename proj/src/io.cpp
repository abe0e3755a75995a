#include "qcons/io.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qcons/error.hpp"

namespace qcons {

void write_trace_csv(std::ostream& os, std::span<const Snapshot> states) {
  os << "k,i,x_num,x_den,floor_x\n";
  for (const auto& s : states) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const Rational& v = s.x[i];
      os << s.k << ',' << i << ',' << v.num() << ',' << v.den() << ',' << v.floor() << '\n';
    }
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size() && s.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "trace line " + std::to_string(line) + ": bad integer '" + s + "'");
}

}  // namespace

std::vector<Snapshot> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "k,i,x_num,x_den,floor_x") throw Error(ErrorCode::ParseError, "unexpected trace header: " + line);

  std::vector<Snapshot> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5) throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": 5 fields expected");
    const std::uint64_t k = parse_u64(cells[0], lineno);
    const std::uint64_t i = parse_u64(cells[1], lineno);
    const Rational v = Rational::parse(cells[2] + "/" + cells[3]);
    if (v.floor() != Integer(cells[4])) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": floor column disagrees");
    }
    if (out.empty() || out.back().k != k) {
      if (!out.empty() && k <= out.back().k) {
        throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": iterations out of order");
      }
      if (!out.empty() && out.back().x.size() != out.front().x.size()) {
        throw Error(ErrorCode::ParseError, "iteration " + std::to_string(out.back().k) + " has missing nodes");
      }
      out.push_back({k, {}});
    }
    if (i != out.back().x.size()) throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) + ": node out of order");
    out.back().x.push_back(v);
  }
  if (!out.empty() && out.back().x.size() != out.front().x.size()) {
    throw Error(ErrorCode::ParseError, "last iteration has missing nodes");
  }
  return out;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j;
  j["kind"] = verdict_kind(v);
  if (const auto* c = std::get_if<QuantizedConsensus>(&v)) {
    j["k0"] = c->k0;
    j["level"] = c->level.str();
  } else if (const auto* c = std::get_if<Cycle>(&v)) {
    j["t_conv"] = c->t_conv;
    j["period"] = c->period;
  } else {
    j["iterations"] = std::get<Undecided>(v).iterations;
  }
  return j;
}

Verdict verdict_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "QuantizedConsensus") {
      return QuantizedConsensus{j.at("k0").get<std::uint64_t>(), Rational::parse(j.at("level").get<std::string>())};
    }
    if (kind == "Cycle") return Cycle{j.at("t_conv").get<std::uint64_t>(), j.at("period").get<std::uint64_t>()};
    if (kind == "Undecided") return Undecided{j.at("iterations").get<std::uint64_t>()};
    throw Error(ErrorCode::ParseError, "unknown verdict kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("verdict json: ") + e.what());
  }
}

}  // namespace qcons
