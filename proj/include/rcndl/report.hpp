#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcndl/oracle.hpp"
#include "rcndl/scheduler.hpp"

namespace rcndl {

struct RunReport {
  const PreparedNetwork* network = nullptr;
  const EvidenceSet* evidence = nullptr;
  const RunTrace* trace = nullptr;
  const FullJoint* oracle = nullptr;  // set for oracle comparisons
  bool include_trace = false;
  std::optional<std::string> intermediate;
};

std::string render_text(const RunReport& r);
nlohmann::json render_json(const RunReport& r);

std::string render_trace_step(const TraceStep& step);

}  // namespace rcndl
