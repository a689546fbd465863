// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited JSON trial records. Field names are a compatibility
// contract:
//
//   {"study": <config hash>, "optimizer": <entry name>, "trial": <index>,
//    "unit": [...], "decoded": {...}, "valid": bool, "invalid_reason": str?,
//    "feasible": bool, "failed_step": int|null, "wall_steps": int,
//    "evals": [{"step", "split", "loss", "error"}, ...],
//    "final": {"train": {"loss", "error"}, "val": {...}, "test": {...}}}
//
// Non-finite numbers are written as the strings "inf", "-inf", "nan".
#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "optbench/stats.hpp"

namespace optbench {

std::string record_to_line(const TrialRecord& record, std::string_view study_hash);

struct ParsedRecord {
  std::string study_hash;
  TrialRecord record;
};
ParsedRecord record_from_line(std::string_view line);

std::vector<ParsedRecord> read_records(std::istream& in);

}  // namespace optbench
