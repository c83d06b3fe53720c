#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "fchp/bench.hpp"
#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"

namespace fchp::bench {

namespace {

constexpr double kSlack = 1e-9;

struct Slot {
  bool clone = false;
  std::size_t index = 0;  // origin server id, or clone number
};

}  // namespace

void AutoscalePolicy::validate() const {
  if (!(0 < down_threshold && down_threshold < up_threshold && up_threshold <= 1)) {
    throw DomainError("autoscale thresholds need 0 < down < up <= 1");
  }
  if (cooldown_periods < 0) throw DomainError("cooldown_periods must be >= 0");
  if (!(machine_type.bandwidth_mb > 0)) throw DomainError("machine type needs bandwidth");
}

double base_fleet_cost(const Instance& instance) {
  double cost = 0.0;
  for (const auto& s : instance.servers) {
    if (s.pool == Pool::origin) cost += s.price_per_period * instance.horizon;
  }
  return cost;
}

AutoscaleResult autoscale_simulate(const Instance& instance, const AutoscalePolicy& policy) {
  policy.validate();
  double image_mb = 0.0;
  for (const auto& c : instance.contents) image_mb += c.size_mb;
  if (policy.machine_type.storage_mb + kSlack < image_mb) {
    throw ImageTooSmall("machine type '" + policy.machine_type.name + "' stores " +
                        std::to_string(policy.machine_type.storage_mb) + " MB, the image needs " +
                        std::to_string(image_mb) + " MB");
  }

  const int horizon = instance.horizon;
  std::vector<std::vector<RequestId>> arrivals(static_cast<std::size_t>(horizon));
  for (const auto& r : instance.requests) arrivals[static_cast<std::size_t>(r.arrival_period)].push_back(r.id);

  std::vector<Slot> active;
  for (auto j : instance.servers_in(Pool::origin)) active.push_back({false, idx(j)});
  // origin servers only serve what they store from the start; clones carry the whole image
  auto stores = [&](const Slot& s, RequestId r) {
    if (s.clone) return true;
    const auto& c = instance.content(instance.request(r).content);
    const ServerId j = server_id(s.index);
    return c.origin_server == j || std::find(c.preload.begin(), c.preload.end(), j) != c.preload.end();
  };
  auto bandwidth = [&](const Slot& s) {
    return s.clone ? policy.machine_type.bandwidth_mb : instance.servers[s.index].bandwidth_mb;
  };

  AutoscaleResult result;
  std::vector<std::tuple<int, Slot, RequestId>> served;
  std::deque<RequestId> pending;
  std::size_t rr = 0;
  int last_action = -policy.cooldown_periods - 1;

  for (int t = 0; t < horizon; ++t) {
    for (auto r : arrivals[static_cast<std::size_t>(t)]) pending.push_back(r);
    std::vector<double> load(active.size(), 0.0);
    std::deque<RequestId> waiting;
    double served_mb = 0.0;
    for (auto r : pending) {
      const double size = instance.request_size(r);
      bool placed = false;
      for (std::size_t i = 0; i < active.size() && !placed; ++i) {
        const std::size_t s = (rr + i) % active.size();
        if (!stores(active[s], r) || load[s] + size > bandwidth(active[s]) + kSlack) continue;
        load[s] += size;
        served_mb += size;
        served.emplace_back(t, active[s], r);
        rr = (s + 1) % active.size();
        placed = true;
      }
      if (!placed) waiting.push_back(r);
    }
    pending.swap(waiting);
    result.active_servers.push_back(static_cast<int>(active.size()));

    double capacity = 0.0;
    for (const auto& s : active) capacity += bandwidth(s);
    const double utilization = served_mb / capacity;
    if (t + 1 >= horizon || t - last_action < policy.cooldown_periods) continue;
    if (utilization > policy.up_threshold) {
      active.push_back({true, result.hires.size()});
      result.hires.push_back({t + 1, horizon - 1});
      last_action = t;
    } else if (utilization < policy.down_threshold && active.back().clone) {
      result.hires[active.back().index].last = t;
      active.pop_back();
      rr %= active.size();
      last_action = t;
    }
  }
  // anything still queued at the last period goes to extra clones hired for that period only
  const int last = horizon - 1;
  while (!pending.empty()) {
    const Slot slot{true, result.hires.size()};
    result.hires.push_back({last, last});
    ++result.active_servers.back();
    double load = 0.0;
    std::deque<RequestId> waiting;
    for (auto r : pending) {
      const double size = instance.request_size(r);
      if (load + size > policy.machine_type.bandwidth_mb + kSlack) {
        waiting.push_back(r);
        continue;
      }
      load += size;
      served.emplace_back(last, slot, r);
    }
    if (waiting.size() == pending.size()) {
      throw Infeasible("a request is larger than the autoscale machine bandwidth");
    }
    pending.swap(waiting);
  }

  Instance ext = instance;
  const std::size_t base_servers = instance.servers.size();
  for (std::size_t h = 0; h < result.hires.size(); ++h) {
    ServerSpec clone = policy.machine_type;
    clone.id = server_id(base_servers + h);
    clone.name = "autoscale-" + std::to_string(h + 1);
    clone.pool = Pool::cloud;
    ext.servers.push_back(clone);
    for (auto& c : ext.contents) c.preload.push_back(clone.id);
  }

  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> slot_of;
  for (const auto& [t, s, r] : served) {
    const std::size_t server = s.clone ? base_servers + s.index : s.index;
    const ContentId k = instance.request(r).content;
    const auto key = std::make_tuple(t, server, idx(k));
    auto it = slot_of.find(key);
    if (it == slot_of.end()) {
      slot_of.emplace(key, result.solution.assignments.size());
      result.solution.assignments.push_back({k, server_id(server), {r}, t});
    } else {
      result.solution.assignments[it->second].requests.push_back(r);
    }
  }
  canonicalize(result.solution);

  CostBreakdown costs = evaluate(ext, result.solution);
  double image_copy = 0.0;
  for (const auto& c : instance.contents) image_copy += ext.copy_cost(c.id);
  costs.replication += image_copy * static_cast<double>(result.hires.size());
  costs.total = costs.attend + costs.backlog + costs.replication;
  costs.servers_od = static_cast<int>(result.hires.size());
  costs.financial = 0.0;
  for (const auto& h : result.hires) costs.financial += policy.machine_type.price_per_period * (h.last - h.first + 1);
  result.costs = costs;
  result.fleet_financial = base_fleet_cost(instance) + costs.financial;
  result.instance = std::move(ext);
  return result;
}

}  // namespace fchp::bench
