#include "fchp/construct.hpp"

#include <algorithm>

#include "fchp/errors.hpp"

namespace fchp {

namespace {

constexpr double kBandwidthSlack = 1e-9;

// Whether the start-of-period placement puts `content` on `server` at `period`.
bool placed_at_start(const Instance& inst, ServerId server, ContentId content, int period) {
  const auto& c = inst.content(content);
  if (c.start_period != period) return false;
  return c.origin_server == server || std::find(c.preload.begin(), c.preload.end(), server) != c.preload.end();
}

}  // namespace

BuildState::BuildState(const Instance& instance)
    : instance_(&instance),
      costs_(instance),
      bandwidth_used_(instance.servers.size() * static_cast<std::size_t>(instance.horizon), 0.0),
      checkpoint_(instance) {}

double BuildState::remaining_bandwidth(ServerId server, int period) const {
  const auto at = idx(server) * static_cast<std::size_t>(instance_->horizon) + static_cast<std::size_t>(period);
  return instance_->server(server).bandwidth_mb - bandwidth_used_[at];
}

bool BuildState::replay(int through, std::optional<ReplicaUse> extra, int probe_period,
                        bool* probe_held) const {
  PlacementEngine engine = checkpoint_;
  std::vector<ReplicaUse> uses;
  std::vector<CopyEvent> copies;
  auto it = tuple_index_.lower_bound({frontier_, 0, 0});
  for (int t = frontier_; t <= through; ++t) {
    uses.clear();
    for (; it != tuple_index_.end() && std::get<0>(it->first) == t; ++it) {
      const auto& a = solution_.assignments[it->second];
      uses.push_back({a.server, a.content});
    }
    if (t == probe_period) {
      if (probe_held != nullptr && extra) {
        *probe_held = engine.holds(extra->server, extra->content) ||
                      placed_at_start(*instance_, extra->server, extra->content, t) ||
                      std::any_of(uses.begin(), uses.end(), [&](const ReplicaUse& u) {
                        return u.server == extra->server && u.content == extra->content;
                      });
      }
      if (extra) uses.push_back(*extra);
    }
    if (!engine.advance(uses, copies)) return false;
  }
  return true;
}

void BuildState::advance_frontier(int period) {
  if (period <= frontier_) return;
  std::vector<ReplicaUse> uses;
  std::vector<CopyEvent> copies;
  auto it = tuple_index_.lower_bound({frontier_, 0, 0});
  for (int t = frontier_; t < period; ++t) {
    uses.clear();
    for (; it != tuple_index_.end() && std::get<0>(it->first) == t; ++it) {
      const auto& a = solution_.assignments[it->second];
      uses.push_back({a.server, a.content});
    }
    if (!checkpoint_.advance(uses, copies)) {
      throw Error("committed plan became unplaceable at period " + std::to_string(t));
    }
  }
  frontier_ = period;
}

bool BuildState::holds_at(ServerId server, ContentId content, int period) const {
  PlacementEngine engine = checkpoint_;
  std::vector<ReplicaUse> uses;
  std::vector<CopyEvent> copies;
  auto it = tuple_index_.lower_bound({frontier_, 0, 0});
  for (int t = frontier_; t <= period; ++t) {
    uses.clear();
    for (; it != tuple_index_.end() && std::get<0>(it->first) == t; ++it) {
      const auto& a = solution_.assignments[it->second];
      uses.push_back({a.server, a.content});
    }
    if (t == period) break;
    if (!engine.advance(uses, copies)) return false;
  }
  return engine.holds(server, content) || placed_at_start(*instance_, server, content, period) ||
         std::any_of(uses.begin(), uses.end(), [&](const ReplicaUse& u) {
           return u.server == server && u.content == content;
         });
}

std::optional<bool> BuildState::probe(ContentId content, ServerId server, int period) const {
  if (remaining_bandwidth(server, period) + kBandwidthSlack < instance_->content(content).size_mb) {
    return std::nullopt;
  }
  bool held = false;
  if (!replay(instance_->horizon - 1, ReplicaUse{server, content}, period, &held)) return std::nullopt;
  return held;
}

bool BuildState::can_serve(ContentId content, ServerId server, int period) const {
  return probe(content, server, period).has_value();
}

void BuildState::commit(RequestId request, ServerId server, int period) {
  const auto& req = instance_->request(request);
  const auto key = std::make_tuple(period, idx(server), idx(req.content));
  auto it = tuple_index_.find(key);
  if (it == tuple_index_.end()) {
    solution_.assignments.push_back({req.content, server, {request}, period});
    tuple_index_.emplace(key, solution_.assignments.size() - 1);
  } else {
    solution_.assignments[it->second].requests.push_back(request);
  }
  const auto at = idx(server) * static_cast<std::size_t>(instance_->horizon) + static_cast<std::size_t>(period);
  bandwidth_used_[at] += instance_->content(req.content).size_mb;
  last_period_ = std::max(last_period_, period);
}

std::optional<double> marginal_cost(const BuildState& state, const Request& request,
                                    const ServerSpec& server, int period) {
  if (period < request.arrival_period) return std::nullopt;
  const auto held = state.probe(request.content, server.id, period);
  if (!held) return std::nullopt;
  double cost = state.costs().attend(request.id) + state.costs().waiting(request.id, period);
  if (!*held) cost += state.costs().copy(request.content);
  return cost;
}

Solution construct_solution(const Instance& instance, Rng& rng) {
  std::vector<RequestId> order;
  order.reserve(instance.requests.size());
  for (const auto& r : instance.requests) order.push_back(r.id);
  std::stable_sort(order.begin(), order.end(), [&](RequestId a, RequestId b) {
    return instance.request(a).arrival_period < instance.request(b).arrival_period;
  });

  const auto origin = instance.servers_in(Pool::origin);
  const auto cloud = instance.servers_in(Pool::cloud);
  BuildState state(instance);

  std::size_t begin = 0;
  while (begin < order.size()) {
    const int arrival = instance.request(order[begin]).arrival_period;
    std::size_t end = begin;
    while (end < order.size() && instance.request(order[end]).arrival_period == arrival) ++end;
    rng.shuffle(std::span<RequestId>(order.data() + begin, end - begin));
    state.advance_frontier(arrival);

    for (std::size_t n = begin; n < end; ++n) {
      const auto& req = instance.request(order[n]);
      bool placed = false;
      for (int t = arrival; t < instance.horizon && !placed; ++t) {
        for (const auto* pool : {&origin, &cloud}) {
          std::optional<ServerId> best;
          double best_cost = 0.0;
          for (ServerId j : *pool) {
            const auto cost = marginal_cost(state, req, instance.server(j), t);
            if (cost && (!best || *cost < best_cost)) {
              best = j;
              best_cost = *cost;
            }
          }
          if (best) {
            state.commit(req.id, *best, t);
            placed = true;
            break;
          }
        }
      }
      if (!placed) {
        throw Infeasible("request " + std::to_string(idx(req.id)) + " cannot be served within the horizon");
      }
    }
    begin = end;
  }

  Solution out = state.solution();
  canonicalize(out);
  return out;
}

void canonicalize(Solution& solution) {
  for (auto& a : solution.assignments) std::sort(a.requests.begin(), a.requests.end());
  std::sort(solution.assignments.begin(), solution.assignments.end(),
            [](const Assignment& a, const Assignment& b) {
              if (a.period != b.period) return a.period < b.period;
              if (a.server != b.server) return a.server < b.server;
              if (a.content != b.content) return a.content < b.content;
              return a.requests < b.requests;
            });
}

}  // namespace fchp
