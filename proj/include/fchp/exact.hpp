#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fchp/instance.hpp"
#include "fchp/types.hpp"

namespace fchp {

struct ExactOptions {
  std::int64_t node_limit = 5'000'000;
  bool prune_bound = true;     // off: enumerate every bandwidth-feasible branch
  bool break_symmetry = true;  // interchangeable requests take choices in canonical order
  bool seed_with_greedy = true;
};

struct ExactResult {
  Solution solution;
  double cost = 0.0;
  bool proven = false;  // search space exhausted within node_limit
  std::int64_t nodes = 0;
};

/// Per-request (server, period) choices; nullopt = not yet assigned.
struct PartialAssignment {
  std::vector<std::optional<std::pair<ServerId, int>>> choice;  // indexed by request
};

/// Admissible bound on every completion of `partial`: attendance and backlog of
/// the assigned requests, one copy for each (content, server) pair they use
/// that the server did not hold initially, plus c_i of unassigned requests.
double lower_bound(const Instance& instance, const PartialAssignment& partial);

/// Depth-first branch and bound over request placements. Replica, storage and
/// copy accounting of complete plans goes through the model evaluator.
/// Throws Infeasible when the search space holds no feasible plan and
/// BudgetExhausted when the node budget ran out before one was found.
ExactResult exact_solve(const Instance& instance, const ExactOptions& options = {});

}  // namespace fchp
