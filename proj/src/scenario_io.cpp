#include "farmsim/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace farmsim {

using nlohmann::json;

namespace {

SizeDistribution ParseSize(const json& node) {
  SizeDistribution d;
  d.kind = SizeKindFromString(node.at("kind").get<std::string>());
  if (d.kind == SizeKind::kParetoFinite) d.shape = kParetoFiniteShape;
  if (d.kind == SizeKind::kParetoInfinite) d.shape = kParetoInfiniteShape;
  if (node.contains("shape")) d.shape = node.at("shape").get<double>();
  return d;
}

}  // namespace

Scenario ParseScenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario file: ") + e.what());
  }
  Scenario s;
  try {
    s.name = root.value("name", std::string("unnamed"));
    const double rate_unit = root.value("rate_unit", 1.0);
    for (const json& g : root.at("groups")) {
      ServerGroup group;
      group.id = g.at("id").get<int>();
      group.mu = g.at("mu").get<double>() * rate_unit;
      group.eps_busy = g.at("eps_busy").get<double>();
      group.eps_idle = g.at("eps_idle").get<double>();
      group.buffer = g.at("buffer").get<int>();
      group.base_count = g.value("base_count", 1);
      s.groups.push_back(group);
    }
    for (const json& t : root.at("job_types")) {
      JobType type;
      type.id = t.at("id").get<int>();
      type.base_rate = t.at("base_rate").get<double>();
      type.available_groups = t.at("available_groups").get<std::vector<int>>();
      std::sort(type.available_groups.begin(), type.available_groups.end());
      if (t.contains("size_dist")) type.size_dist = ParseSize(t.at("size_dist"));
      s.job_types.push_back(type);
    }
    s.discipline = DisciplineFromString(root.value("discipline", std::string("ps")));
    s.tie_break = TieBreakFromString(root.value("tie_break", std::string("lltb")));
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("invalid scenario file: ") + e.what());
  }
  s.Validate();
  return s;
}

Scenario LoadScenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseScenario(buf.str());
}

std::string ScenarioToJson(const Scenario& scenario) {
  const Scenario base = Rebase(scenario);
  json root;
  root["name"] = base.name;
  root["groups"] = json::array();
  for (const ServerGroup& g : base.groups) {
    root["groups"].push_back({{"id", g.id},
                              {"mu", g.mu},
                              {"eps_busy", g.eps_busy},
                              {"eps_idle", g.eps_idle},
                              {"buffer", g.buffer},
                              {"base_count", g.base_count}});
  }
  root["job_types"] = json::array();
  for (const JobType& t : base.job_types) {
    json size = {{"kind", ToString(t.size_dist.kind)}};
    if (t.size_dist.IsPareto()) size["shape"] = t.size_dist.shape;
    root["job_types"].push_back({{"id", t.id},
                                 {"base_rate", t.base_rate},
                                 {"available_groups", t.available_groups},
                                 {"size_dist", size}});
  }
  root["discipline"] = ToString(base.discipline);
  root["tie_break"] = ToString(base.tie_break);
  return root.dump(2) + "\n";
}

void SaveScenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write scenario file " + path);
  out << ScenarioToJson(scenario);
}

}  // namespace farmsim
