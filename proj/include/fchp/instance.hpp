#pragma once

#include <span>
#include <vector>

#include "fchp/types.hpp"

namespace fchp {

/// The planning input: servers, contents, requests over `horizon` periods.
struct Instance {
  std::vector<ServerSpec> servers;
  std::vector<Content> contents;
  std::vector<Request> requests;
  int horizon = 1;
  double period_seconds = 3600.0;
  CostParams costs;

  const ServerSpec& server(ServerId id) const { return servers[idx(id)]; }
  const Content& content(ContentId id) const { return contents[idx(id)]; }
  const Request& request(RequestId id) const { return requests[idx(id)]; }

  bool has_server(ServerId id) const { return idx(id) < servers.size(); }
  bool has_content(ContentId id) const { return idx(id) < contents.size(); }
  bool has_request(RequestId id) const { return idx(id) < requests.size(); }

  double attend_cost(RequestId id) const { return costs.attend[idx(id)]; }
  double copy_cost(ContentId id) const { return costs.copy[idx(id)]; }
  double request_size(RequestId id) const { return content(request(id).content).size_mb; }

  /// p_it for request `id` waiting during period `t`.
  double backlog_penalty(RequestId id, int t) const;

  /// Fills attend/copy vectors that are empty from sizes and bandwidth defaults.
  void apply_default_costs();

  /// Throws InvalidInstance describing the first broken invariant.
  void validate() const;

  std::vector<ServerId> servers_in(Pool pool) const;
};

/// Precomputed objective tables for fast repeated evaluation.
class CostModel {
 public:
  explicit CostModel(const Instance& instance);

  double attend(RequestId id) const { return attend_[idx(id)]; }
  double copy(ContentId id) const { return copy_[idx(id)]; }

  /// Sum of p_it for t in [arrival, serve_period).
  double waiting(RequestId id, int serve_period) const;

 private:
  std::vector<double> attend_;
  std::vector<double> copy_;
  std::vector<int> arrival_;
  std::vector<std::size_t> offset_;
  std::vector<double> prefix_;  // per request: cumulative penalty from arrival
};

}  // namespace fchp
