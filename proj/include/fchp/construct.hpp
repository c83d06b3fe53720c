#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "fchp/instance.hpp"
#include "fchp/rng.hpp"
#include "fchp/timeline.hpp"
#include "fchp/types.hpp"

namespace fchp {

/// Incremental state of the greedy construction.
///
/// Requests are committed in arrival order, so every period before the
/// current frontier is final; the replica state at the frontier is kept as a
/// checkpoint and only periods from the frontier on are re-simulated when a
/// candidate placement is tried.
class BuildState {
 public:
  explicit BuildState(const Instance& instance);

  const Instance& instance() const { return *instance_; }
  const Solution& solution() const { return solution_; }
  int frontier() const { return frontier_; }

  double remaining_bandwidth(ServerId server, int period) const;

  /// Moves the checkpoint to the start of `period` (monotone).
  void advance_frontier(int period);

  /// Whether `server` holds `content` at `period` once the committed
  /// assignments of that period are placed.
  bool holds_at(ServerId server, ContentId content, int period) const;

  /// Whether serving one more `content` request on `server` at `period`
  /// keeps the committed plan within bandwidth and storage.
  bool can_serve(ContentId content, ServerId server, int period) const;

  /// can_serve and holds_at in one replay: nullopt when infeasible, else
  /// whether the replica was already there.
  std::optional<bool> probe(ContentId content, ServerId server, int period) const;

  const CostModel& costs() const { return costs_; }

  void commit(RequestId request, ServerId server, int period);

 private:
  bool replay(int through, std::optional<ReplicaUse> extra, int probe_period, bool* probe_held) const;

  const Instance* instance_;
  CostModel costs_;
  Solution solution_;
  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> tuple_index_;  // (t, j, k)
  std::vector<double> bandwidth_used_;  // [server * horizon + period]
  PlacementEngine checkpoint_;
  int frontier_ = 0;
  int last_period_ = -1;
};

/// c_i + h_k when the server lacks the content at `period` + accrued backlog;
/// nullopt when bandwidth or storage rules out the placement.
std::optional<double> marginal_cost(const BuildState& state, const Request& request,
                                    const ServerSpec& server, int period);

/// Randomized greedy: requests by arrival (shuffled within an arrival period),
/// cheapest feasible origin server first, cloud servers only when no origin
/// server fits, postponing one period at a time when nothing fits.
/// Throws Infeasible when a request cannot be served within the horizon.
Solution construct_solution(const Instance& instance, Rng& rng);

/// Sorts assignments by (period, server, content) and request ids ascending.
void canonicalize(Solution& solution);

}  // namespace fchp
