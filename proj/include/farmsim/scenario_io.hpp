#ifndef FARMSIM_SCENARIO_IO_HPP_
#define FARMSIM_SCENARIO_IO_HPP_

#include <string>

#include "farmsim/model.hpp"

namespace farmsim {

// Scenario files are JSON trees:
//   { "name": ..., "rate_unit": 1.0,
//     "groups": [{"id","mu","eps_busy","eps_idle","buffer","base_count"}],
//     "job_types": [{"id","base_rate","available_groups":[...],
//                    "size_dist":{"kind","shape"?}}],
//     "discipline": "ps"|"srpt", "tie_break": "lltb"|"sqtb" }
// Quantities are unit-scale; the scaling parameter is supplied at run time.
// "rate_unit", when present, multiplies every group's mu on load.
Scenario ParseScenario(const std::string& text);
Scenario LoadScenario(const std::string& path);
std::string ScenarioToJson(const Scenario& scenario);
void SaveScenario(const Scenario& scenario, const std::string& path);

}  // namespace farmsim

#endif  // FARMSIM_SCENARIO_IO_HPP_
