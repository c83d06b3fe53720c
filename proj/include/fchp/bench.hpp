#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fchp/instance.hpp"
#include "fchp/tracegen.hpp"
#include "fchp/types.hpp"

namespace fchp::bench {

// ---------------------------------------------------------------------------
// Access logs and instance building

struct LogEntry {
  double timestamp_seconds = 0.0;
  std::string content_id;
  std::optional<double> size_mb;
};

struct AccessLog {
  std::vector<LogEntry> entries;  // sorted by timestamp after parsing
  std::string source;
};

/// CSV `timestamp_seconds,content_id[,size_mb]`, header optional.
AccessLog access_log_from_csv(const std::string& text, std::string source = {});

struct PeriodCount {
  int period = 0;
  std::string content_id;
  int count = 0;

  friend bool operator==(const PeriodCount&, const PeriodCount&) = default;
};

/// Buckets the log into periods and keeps the top_k contents of each period
/// (ties broken by content id). Sorted by (period, content id).
std::vector<PeriodCount> discretize_and_filter(const AccessLog& log, double period_seconds, int top_k);

/// Same bucketing and filter for a generated trace sampled every `step_seconds`.
std::vector<PeriodCount> discretize_trace(const trace::Trace& trace, double step_seconds,
                                          double period_seconds, int top_k);

/// Server types and content sizes used to turn counts into an Instance.
///
///   {"servers": [{"name": "m3.large", "pool": "origin", "storage_mb": 8000,
///                 "bandwidth_mb": 2000, "price_per_period": 2, "count": 2}, ...],
///    "content_sizes": {"a": 900}, "default_content_size_mb": 100}
struct ServerType {
  std::string name;
  Pool pool = Pool::origin;
  double storage_mb = 0.0;
  double bandwidth_mb = 0.0;
  double price_per_period = 0.0;
  int count = 1;
};

struct Catalog {
  std::vector<ServerType> types;
  std::map<std::string, double> content_sizes;
  std::optional<double> default_content_size_mb;

  /// One ServerSpec per unit, ids in catalog order.
  std::vector<ServerSpec> expand() const;
  const ServerType* find_type(const std::string& name) const;
};

Catalog catalog_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Catalog& catalog);

/// One request per counted access, horizon = last period + 1, contents sorted
/// by name starting at period 0 on the first origin server and preloaded on
/// every other origin server. Sizes come from the catalog, then `log_sizes`.
/// Throws EmptyInstance when there is nothing to serve.
Instance build_instance(const std::vector<PeriodCount>& counts, const Catalog& catalog,
                        double period_seconds, const std::map<std::string, double>& log_sizes = {},
                        double backlog_rho = 2.0);

// ---------------------------------------------------------------------------
// Threshold autoscaling baseline

struct AutoscalePolicy {
  double up_threshold = 0.8;
  double down_threshold = 0.3;
  int cooldown_periods = 1;
  ServerSpec machine_type;  // clone template; must store every content

  void validate() const;
};

struct HireInterval {
  int first = 0;  // first active period
  int last = 0;   // last active period
};

struct AutoscaleResult {
  Instance instance;  // input servers plus one cloud server per hired clone
  Solution solution;
  CostBreakdown costs;  // replication includes the full image per hire; financial = clones
  double fleet_financial = 0.0;  // base servers for the whole horizon + clones
  std::vector<HireInterval> hires;
  std::vector<int> active_servers;  // per period
};

/// Origin servers form the initial fleet; requests go round-robin to active
/// servers with spare bandwidth (an origin server only takes contents it
/// stores from the start) and the rest wait for the next period. After
/// each period the mean utilization (served MB over active bandwidth) above
/// up_threshold hires one clone, below down_threshold releases the newest,
/// at most one action per cooldown window. Requests still queued after the
/// last period go to extra clones hired for that period alone.
/// Throws ImageTooSmall, and Infeasible when a request exceeds the clone bandwidth.
AutoscaleResult autoscale_simulate(const Instance& instance, const AutoscalePolicy& policy);

/// Price of keeping the origin servers for the whole horizon.
double base_fleet_cost(const Instance& instance);

// ---------------------------------------------------------------------------
// Suite runs and reports

/// 100 * (heuristic - reference) / reference rounded to one decimal.
double compute_gap(double heuristic_total, double reference_total);

struct ResultRow {
  std::string instance;
  std::string method;
  double servers_od = 0.0;
  double total = 0.0;
  double attend = 0.0;
  double repli = 0.0;
  double back = 0.0;
  double time_s = 0.0;
  double financial = 0.0;  // fleet bill: origin servers over the horizon + cloud use
  std::optional<double> gap_pct;
  bool proven = true;  // exact rows only
};

struct PeriodProfile {
  std::string instance;
  std::string method;
  std::vector<int> arrived;
  std::vector<int> served;
  std::vector<int> waiting;  // requests arrived but not yet served at the end of the period
  std::vector<int> cloud_active;
};

struct SuiteOptions {
  std::vector<std::string> methods = {"greedy", "ils", "exact", "autoscale"};
  std::uint64_t seed = 1;
  int ils_runs = 3;
  int iter_max = 3;
  int level_max = 7;
  int delay_d = 1;
  std::int64_t node_limit = 200'000;
  unsigned threads = 0;  // 0 = FCHP_THREADS or hardware concurrency
  std::optional<AutoscalePolicy> autoscale;  // default: largest server type in the instance
};

struct SuiteInstance {
  std::string label;
  Instance instance;
};

struct SuiteReport {
  std::vector<ResultRow> rows;
  std::vector<PeriodProfile> profiles;
  std::vector<std::string> warnings;  // (instance, method) runs that failed
};

SuiteReport run_suite(const std::vector<SuiteInstance>& instances, const SuiteOptions& options);

/// Every *.json instance under `dir`, sorted by file name.
std::vector<SuiteInstance> load_suite(const std::filesystem::path& dir);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const std::string& text);
std::string profiles_to_csv(const std::vector<PeriodProfile>& profiles);

PeriodProfile make_profile(const Instance& instance, const Solution& solution, std::string label,
                           std::string method);

// ---------------------------------------------------------------------------
// Flash crowd scenarios

struct ScenarioContent {
  std::string name;
  double size_mb = 0.0;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  double period_seconds = 60.0;
  int horizon = 60;
  trace::TraceConfig trace;  // plan content ids refer to ScenarioContent names
  std::vector<ScenarioContent> contents;
  int target_requests = 0;  // 0 keeps every generated access
  Catalog catalog;
  AutoscalePolicy autoscale;
  double backlog_rho = 2.0;

  std::vector<std::string> flash_contents() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Generates the scenario trace, thins it to target_requests with the
/// scenario seed and builds the instance (contents in config order).
Instance build_scenario_instance(const ScenarioConfig& config);

/// Contents copied onto cloud servers by `solution`, by name.
std::vector<std::string> contents_replicated_to_cloud(const Instance& instance, const Solution& solution);

// ---------------------------------------------------------------------------

/// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace fchp::bench
