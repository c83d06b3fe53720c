#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fchp/evaluate.hpp"
#include "fchp/instance.hpp"
#include "fchp/types.hpp"

namespace fchp {

using Json = nlohmann::json;

// Instance files: top-level `servers`, `contents`, `requests`, `horizon`,
// `period_seconds` and an optional `costs` block. Missing attend/copy costs
// are derived from sizes. Parsing validates the instance.
Instance instance_from_json(const Json& j);
Json to_json(const Instance& instance);

// Solution files are either a bare list of assignments or an object with an
// `assignments` key (plus free-form metadata).
Solution solution_from_json(const Json& j);
Json to_json(const Solution& solution);

Json to_json(const CostBreakdown& cost);
Json to_json(const Violation& violation);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Instance load_instance(const std::filesystem::path& path);
Solution load_solution(const std::filesystem::path& path);

}  // namespace fchp
