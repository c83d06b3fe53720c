#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fchp {

// Entity identifiers are dense 0-based indices into the owning Instance.
enum class ServerId : std::uint32_t {};
enum class ContentId : std::uint32_t {};
enum class RequestId : std::uint32_t {};

constexpr std::size_t idx(ServerId id) { return static_cast<std::size_t>(id); }
constexpr std::size_t idx(ContentId id) { return static_cast<std::size_t>(id); }
constexpr std::size_t idx(RequestId id) { return static_cast<std::size_t>(id); }

constexpr ServerId server_id(std::size_t i) { return static_cast<ServerId>(i); }
constexpr ContentId content_id(std::size_t i) { return static_cast<ContentId>(i); }
constexpr RequestId request_id(std::size_t i) { return static_cast<RequestId>(i); }

/// Origin servers are always present; cloud servers are hired when used.
enum class Pool { origin, cloud };

const char* to_string(Pool pool);

struct ServerSpec {
  ServerId id{};
  std::string name;
  Pool pool = Pool::origin;
  double storage_mb = 0.0;
  double bandwidth_mb = 0.0;  // per period
  double price_per_period = 0.0;
};

struct Content {
  ContentId id{};
  std::string name;
  double size_mb = 0.0;
  int start_period = 0;
  ServerId origin_server{};
  // Extra servers that already hold the content when it starts (no copy charged).
  std::vector<ServerId> preload;
};

struct Request {
  RequestId id{};
  ContentId content{};
  int arrival_period = 0;
};

struct BacklogOverride {
  RequestId request{};
  int period = 0;
  double penalty = 0.0;
};

struct CostParams {
  std::vector<double> attend;  // c_i, indexed by request
  std::vector<double> copy;    // h_k, indexed by content
  double backlog_rho = 2.0;    // p_it = rho * c_i unless overridden
  std::vector<BacklogOverride> backlog_overrides;

  // Used only to derive attend/copy when they are not given explicitly.
  double client_bandwidth_mb = 60.0;
  double replication_bandwidth_mb = 600.0;
};

struct Assignment {
  ContentId content{};
  ServerId server{};
  std::vector<RequestId> requests;
  int period = 0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Solution {
  std::vector<Assignment> assignments;

  std::size_t request_count() const;
  friend bool operator==(const Solution&, const Solution&) = default;
};

struct CostBreakdown {
  double attend = 0.0;
  double backlog = 0.0;
  double replication = 0.0;
  double total = 0.0;
  int servers_od = 0;
  double financial = 0.0;  // cloud servers only: price x active periods
};

}  // namespace fchp
