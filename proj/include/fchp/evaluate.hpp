#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fchp/instance.hpp"
#include "fchp/timeline.hpp"
#include "fchp/types.hpp"

namespace fchp {

enum class Rule {
  Unattended,
  DuplicateAssignment,
  UnknownReference,
  EmptyAssignment,
  ContentMismatch,
  ServedBeforeArrival,
  ContentNotStarted,
  PeriodOutOfRange,
  BandwidthExceeded,
  StorageExceeded,
  ReplicaMissing,
};

const char* to_string(Rule rule);

/// One broken feasibility rule. Unset fields do not apply to the rule.
struct Violation {
  Rule rule = Rule::Unattended;
  std::optional<std::size_t> server;
  std::optional<std::size_t> content;
  std::optional<std::size_t> request;
  std::optional<int> period;
  std::string detail;

  /// `RULE server=.. content=.. request=.. period=.. detail`
  std::string to_string() const;
};

/// Objective value of a complete plan. Throws IncompleteSolution when a
/// request is unassigned, plus the derive_timeline errors.
CostBreakdown evaluate(const Instance& instance, const Solution& solution);

/// Empty iff the solution is complete and respects every capacity rule.
std::vector<Violation> check_feasibility(const Instance& instance, const Solution& solution);

/// Reusable evaluator for search loops. Assumes assignments are well formed
/// (references resolve, periods respect arrivals and content starts).
class Evaluator {
 public:
  explicit Evaluator(const Instance& instance);

  const Instance& instance() const { return *instance_; }
  const CostModel& costs() const { return costs_; }

  /// Breakdown of `solution`, or nullopt when bandwidth or storage is
  /// exceeded somewhere. Requests missing from the plan contribute nothing.
  std::optional<CostBreakdown> try_evaluate(const Solution& solution);

  /// Same as try_evaluate(...)->total.
  std::optional<double> feasible_total(const Solution& solution);

 private:
  bool simulate(const Solution& solution, bool want_hires);

  const Instance* instance_;
  CostModel costs_;
  std::vector<std::vector<ReplicaUse>> uses_;
  std::vector<std::vector<std::size_t>> by_period_;
  std::vector<double> load_;
  std::vector<int> serve_period_;
  std::vector<CopyEvent> copies_;
  std::vector<int> first_held_;
  std::vector<int> last_served_;
};

}  // namespace fchp
