// SPDX-License-Identifier: Apache-2.0
#include "optbench/records.hpp"

#include "json_util.hpp"

namespace optbench {

using detail::json;
using detail::number;
using detail::to_double;

std::string record_to_line(const TrialRecord& r, std::string_view study_hash) {
  json unit = json::array();
  for (double u : r.point.unit) unit.push_back(number(u));
  json decoded = json::object();
  for (const auto& [k, v] : r.point.decoded) decoded[k] = number(v);
  json evals = json::array();
  for (const auto& e : r.eval_history) {
    evals.push_back({{"step", e.step},
                     {"split", to_string(e.split)},
                     {"loss", number(e.loss)},
                     {"error", number(e.error)}});
  }
  json final_ = json::object();
  for (const auto& [split, e] : r.final) {
    final_[std::string(to_string(split))] = {{"loss", number(e.loss)}, {"error", number(e.error)}};
  }
  json j = {{"study", study_hash},
            {"optimizer", r.optimizer},
            {"trial", r.trial_index},
            {"unit", unit},
            {"decoded", decoded},
            {"valid", r.point.valid},
            {"feasible", r.feasible},
            {"failed_step", r.failed_step ? json(*r.failed_step) : json(nullptr)},
            {"wall_steps", r.wall_steps},
            {"evals", evals},
            {"final", final_}};
  if (!r.point.valid) j["invalid_reason"] = r.point.invalid_reason;
  return j.dump();
}

ParsedRecord record_from_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed trial record: ") + e.what());
  }
  detail::reject_unknown_keys(j, "trial record",
                              {"study", "optimizer", "trial", "unit", "decoded", "valid",
                               "invalid_reason", "feasible", "failed_step", "wall_steps", "evals",
                               "final"});
  try {
    ParsedRecord out;
    out.study_hash = j.at("study").get<std::string>();
    auto& r = out.record;
    r.optimizer = j.at("optimizer").get<std::string>();
    r.trial_index = j.at("trial").get<std::int64_t>();
    r.point.trial_index = r.trial_index;
    for (const auto& u : j.at("unit")) r.point.unit.push_back(to_double(u));
    for (const auto& [k, v] : j.at("decoded").items()) r.point.decoded[k] = to_double(v);
    r.point.valid = j.at("valid").get<bool>();
    if (j.contains("invalid_reason")) r.point.invalid_reason = j.at("invalid_reason").get<std::string>();
    r.feasible = j.at("feasible").get<bool>();
    if (!j.at("failed_step").is_null()) r.failed_step = j.at("failed_step").get<std::int64_t>();
    r.wall_steps = j.at("wall_steps").get<std::int64_t>();
    for (const auto& e : j.at("evals")) {
      r.eval_history.push_back({e.at("step").get<std::int64_t>(),
                                parse_split(e.at("split").get<std::string>()),
                                to_double(e.at("loss")), to_double(e.at("error"))});
    }
    for (const auto& [k, v] : j.at("final").items()) {
      const auto split = parse_split(k);
      r.final[split] = {r.wall_steps, split, to_double(v.at("loss")), to_double(v.at("error"))};
    }
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trial record: ") + e.what());
  }
}

std::vector<ParsedRecord> read_records(std::istream& in) {
  std::vector<ParsedRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_line(line));
  }
  return out;
}

}  // namespace optbench
