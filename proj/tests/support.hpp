#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fchp/instance.hpp"
#include "fchp/rng.hpp"
#include "fchp/types.hpp"

namespace fchp::testing {

/// Hand-made instances for unit tests. Costs default from sizes unless set
/// on `instance.costs` before build().
struct Builder {
  Instance instance;

  Builder& origin(double storage_mb, double bandwidth_mb, double price = 2.0);
  Builder& cloud(double storage_mb, double bandwidth_mb, double price = 1.0);
  Builder& content(double size_mb, std::size_t origin = 0, int start = 0);
  Builder& request(std::size_t content, int arrival);
  Builder& horizon(int periods);
  Instance build();
};

struct CorpusLimits {
  int max_origin = 2;
  int max_cloud = 2;
  int max_servers = 4;
  int max_contents = 3;
  int min_requests = 3;
  int max_requests = 12;
  int max_horizon = 4;
  bool late_starts = true;  // some contents start after period 0
};

/// Limits of the tiny exact-vs-ILS instances: at most 3 servers, 8 requests,
/// 3 periods and 2 contents.
CorpusLimits tiny_limits();

/// Random small instance. Storage is tight enough to force evictions now and
/// then; bandwidth always fits the largest content.
Instance random_instance(std::uint64_t seed, const CorpusLimits& limits = {});

/// Random complete solution that passes check_feasibility, or nullopt when
/// none turned up within `tries` random draws.
std::optional<Solution> random_feasible_solution(const Instance& instance, Rng& rng, int tries = 200);

/// Objective rebuilt from explicit x_ijt, b_it and w_kjlt tables. Replica
/// bookkeeping is re-simulated here with plain containers, independent of
/// the library's timeline code.
struct OracleCost {
  double attend = 0.0;
  double backlog = 0.0;
  double replication = 0.0;
  double total = 0.0;
  bool storage_ok = true;
};
OracleCost oracle_objective(const Instance& instance, const Solution& solution);

/// Cheapest feasible plan found by enumerating every (server, period) choice
/// for every request. Only usable for a handful of requests.
std::optional<double> brute_force_optimum(const Instance& instance);

/// Number of bandwidth-feasible partial assignments of length >= 1 in the
/// exact search's request order (arrival, then id).
std::int64_t count_bandwidth_feasible_prefixes(const Instance& instance);

}  // namespace fchp::testing
