#include "fchp/instance.hpp"

#include <algorithm>
#include <string>

#include "fchp/errors.hpp"

namespace fchp {

const char* to_string(Pool pool) { return pool == Pool::origin ? "origin" : "cloud"; }

std::size_t Solution::request_count() const {
  std::size_t n = 0;
  for (const auto& a : assignments) n += a.requests.size();
  return n;
}

double Instance::backlog_penalty(RequestId id, int t) const {
  for (const auto& o : costs.backlog_overrides) {
    if (o.request == id && o.period == t) return o.penalty;
  }
  return costs.backlog_rho * attend_cost(id);
}

void Instance::apply_default_costs() {
  if (costs.attend.empty()) {
    costs.attend.reserve(requests.size());
    for (const auto& r : requests) {
      costs.attend.push_back(content(r.content).size_mb / costs.client_bandwidth_mb);
    }
  }
  if (costs.copy.empty()) {
    costs.copy.reserve(contents.size());
    for (const auto& c : contents) {
      costs.copy.push_back(c.size_mb / costs.replication_bandwidth_mb);
    }
  }
}

std::vector<ServerId> Instance::servers_in(Pool pool) const {
  std::vector<ServerId> out;
  for (const auto& s : servers) {
    if (s.pool == pool) out.push_back(s.id);
  }
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw InvalidInstance(what); }

}  // namespace

void Instance::validate() const {
  if (horizon < 1) fail("horizon must be >= 1");
  if (!(period_seconds > 0)) fail("period_seconds must be > 0");

  bool any_origin = false;
  for (std::size_t i = 0; i < servers.size(); ++i) {
    const auto& s = servers[i];
    if (idx(s.id) != i) fail("server ids must be 0..n-1 in order (server " + s.name + ")");
    if (!(s.storage_mb > 0)) fail("server " + std::to_string(i) + ": storage_mb must be > 0");
    if (!(s.bandwidth_mb > 0)) fail("server " + std::to_string(i) + ": bandwidth_mb must be > 0");
    if (s.price_per_period < 0) fail("server " + std::to_string(i) + ": negative price");
    any_origin = any_origin || s.pool == Pool::origin;
  }
  if (!any_origin) fail("at least one origin server is required");

  for (std::size_t k = 0; k < contents.size(); ++k) {
    const auto& c = contents[k];
    const std::string tag = "content " + std::to_string(k);
    if (idx(c.id) != k) fail("content ids must be 0..n-1 in order (" + tag + ")");
    if (!(c.size_mb > 0)) fail(tag + ": size_mb must be > 0");
    if (c.start_period < 0 || c.start_period >= horizon) fail(tag + ": start_period outside horizon");
    if (!has_server(c.origin_server)) fail(tag + ": unknown origin server");
    const auto& origin = server(c.origin_server);
    if (origin.pool != Pool::origin) fail(tag + ": origin server is not in the origin pool");
    if (c.size_mb > origin.storage_mb) fail(tag + ": larger than its origin server storage");
    for (auto p : c.preload) {
      if (!has_server(p)) fail(tag + ": unknown preload server");
      if (p == c.origin_server) fail(tag + ": preload repeats the origin server");
      if (c.size_mb > server(p).storage_mb) fail(tag + ": larger than a preload server storage");
    }
  }

  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    const std::string tag = "request " + std::to_string(i);
    if (idx(r.id) != i) fail("request ids must be 0..n-1 in order (" + tag + ")");
    if (!has_content(r.content)) fail(tag + ": unknown content");
    if (r.arrival_period < content(r.content).start_period) fail(tag + ": arrives before its content starts");
    if (r.arrival_period >= horizon) fail(tag + ": arrives after the horizon");
  }

  if (costs.attend.size() != requests.size()) fail("costs.attend must have one entry per request");
  if (costs.copy.size() != contents.size()) fail("costs.copy must have one entry per content");
  if (costs.backlog_rho < 0) fail("costs.backlog_rho must be >= 0");
  for (double c : costs.attend) {
    if (c < 0) fail("attend costs must be >= 0");
  }
  for (double h : costs.copy) {
    if (h < 0) fail("copy costs must be >= 0");
  }
  for (const auto& o : costs.backlog_overrides) {
    if (!has_request(o.request)) fail("backlog override names an unknown request");
    if (o.period < 0 || o.period >= horizon) fail("backlog override period outside horizon");
    if (o.penalty < 0) fail("backlog penalties must be >= 0");
  }
  for (std::size_t a = 0; a < costs.backlog_overrides.size(); ++a) {
    for (std::size_t b = a + 1; b < costs.backlog_overrides.size(); ++b) {
      const auto& x = costs.backlog_overrides[a];
      const auto& y = costs.backlog_overrides[b];
      if (x.request == y.request && x.period == y.period) fail("duplicate backlog override");
    }
  }
}

CostModel::CostModel(const Instance& instance)
    : attend_(instance.costs.attend), copy_(instance.costs.copy) {
  const auto n = instance.requests.size();
  arrival_.resize(n);
  offset_.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    arrival_[i] = instance.requests[i].arrival_period;
    offset_[i + 1] = offset_[i] + static_cast<std::size_t>(instance.horizon - arrival_[i] + 1);
  }
  prefix_.resize(offset_[n], 0.0);
  std::vector<std::vector<const BacklogOverride*>> overrides(n);
  for (const auto& o : instance.costs.backlog_overrides) overrides[idx(o.request)].push_back(&o);
  for (std::size_t i = 0; i < n; ++i) {
    const double base = instance.costs.backlog_rho * attend_[i];
    double acc = 0.0;
    for (int t = arrival_[i]; t < instance.horizon; ++t) {
      double p = base;
      for (const auto* o : overrides[i]) {
        if (o->period == t) p = o->penalty;
      }
      acc += p;
      prefix_[offset_[i] + static_cast<std::size_t>(t - arrival_[i] + 1)] = acc;
    }
  }
}

double CostModel::waiting(RequestId id, int serve_period) const {
  const auto i = idx(id);
  const int waited = serve_period - arrival_[i];
  if (waited <= 0) return 0.0;
  return prefix_[offset_[i] + static_cast<std::size_t>(waited)];
}

}  // namespace fchp
