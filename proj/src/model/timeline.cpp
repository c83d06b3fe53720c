#include "fchp/timeline.hpp"

#include <algorithm>
#include <string>

#include "fchp/errors.hpp"

namespace fchp {

namespace {

constexpr double kStorageSlack = 1e-9;

}  // namespace

PlacementEngine::PlacementEngine(const Instance& instance)
    : instance_(&instance),
      contents_(instance.contents.size()),
      last_used_(instance.servers.size() * instance.contents.size(), kAbsent),
      protected_(instance.servers.size() * instance.contents.size(), 0),
      replica_count_(instance.contents.size(), 0),
      held_count_(instance.servers.size(), 0),
      free_mb_(instance.servers.size(), 0.0) {
  for (const auto& s : instance.servers) free_mb_[idx(s.id)] = s.storage_mb;
  auto starting = std::make_shared<std::vector<std::vector<ContentId>>>(
      static_cast<std::size_t>(std::max(instance.horizon, 0)));
  for (const auto& c : instance.contents) {
    if (c.start_period >= 0 && c.start_period < instance.horizon) {
      (*starting)[static_cast<std::size_t>(c.start_period)].push_back(c.id);
    }
  }
  starting_ = std::move(starting);
}

bool PlacementEngine::place(ServerId server, ContentId content, int recency,
                            std::vector<Eviction>* evictions) {
  const double needed = instance_->content(content).size_mb;
  const auto s = idx(server);
  const int period = next_period_ - 1;
  while (free_mb_[s] + kStorageSlack < needed) {
    // least recently used evictable replica; ties by content id
    std::size_t victim = contents_;
    int victim_recency = 0;
    for (std::size_t k = 0; k < contents_; ++k) {
      const auto at = s * contents_ + k;
      if (last_used_[at] == kAbsent || protected_[at] || replica_count_[k] <= 1) continue;
      if (victim == contents_ || last_used_[at] < victim_recency) {
        victim = k;
        victim_recency = last_used_[at];
      }
    }
    if (victim == contents_) {
      failure_ = {server, content, period, false};
      return false;
    }
    last_used_[s * contents_ + victim] = kAbsent;
    --replica_count_[victim];
    --held_count_[s];
    free_mb_[s] += instance_->contents[victim].size_mb;
    if (evictions != nullptr) evictions->push_back({content_id(victim), server, period});
  }
  last_used_[slot(server, content)] = recency;
  ++replica_count_[idx(content)];
  ++held_count_[s];
  free_mb_[s] -= needed;
  return true;
}

bool PlacementEngine::advance(std::span<ReplicaUse> uses, std::vector<CopyEvent>& copies,
                              std::vector<Eviction>* evictions) {
  const int t = next_period_;
  ++next_period_;
  if (t >= instance_->horizon) {
    failure_ = {ServerId{}, ContentId{}, t, false};
    return false;
  }

  for (ContentId k : (*starting_)[static_cast<std::size_t>(t)]) {
    const auto& c = instance_->content(k);
    if (!holds(c.origin_server, k) && !place(c.origin_server, k, kNeverUsed, evictions)) return false;
    for (ServerId p : c.preload) {
      if (!holds(p, k) && !place(p, k, kNeverUsed, evictions)) return false;
    }
  }
  if (uses.empty()) return true;

  std::sort(uses.begin(), uses.end(), [](const ReplicaUse& a, const ReplicaUse& b) {
    return a.server != b.server ? a.server < b.server : a.content < b.content;
  });
  auto end = std::unique(uses.begin(), uses.end(), [](const ReplicaUse& a, const ReplicaUse& b) {
    return a.server == b.server && a.content == b.content;
  });
  const auto used = std::span<ReplicaUse>(uses.begin(), end);

  auto protect = [this](std::size_t at) {
    if (!protected_[at]) {
      protected_[at] = 1;
      protected_slots_.push_back(at);
    }
  };

  for (const auto& u : used) {
    const auto at = slot(u.server, u.content);
    if (last_used_[at] != kAbsent) {
      last_used_[at] = t;
      protect(at);
    }
  }

  // Sources are fixed from holdings before any copy of this period.
  sources_.clear();
  bool ok = true;
  for (const auto& u : used) {
    if (holds(u.server, u.content)) continue;
    const auto& c = instance_->content(u.content);
    ServerId source = c.origin_server;
    if (!holds(source, u.content)) {
      bool found = false;
      for (std::size_t j = 0; j < instance_->servers.size(); ++j) {
        if (holds(server_id(j), u.content)) {
          source = server_id(j);
          found = true;
          break;
        }
      }
      if (!found) {
        failure_ = {u.server, u.content, t, true};
        ok = false;
        break;
      }
    }
    sources_.push_back(source);
    protect(slot(source, u.content));
  }

  if (ok) {
    std::size_t next_source = 0;
    for (const auto& u : used) {
      if (holds(u.server, u.content)) continue;
      if (!place(u.server, u.content, t, evictions)) {
        ok = false;
        break;
      }
      protect(slot(u.server, u.content));
      copies.push_back({u.content, sources_[next_source++], u.server, t});
    }
  }

  for (auto at : protected_slots_) protected_[at] = 0;
  protected_slots_.clear();
  return ok;
}

bool PlacementEngine::skip_to(int period, std::vector<Eviction>* evictions) {
  std::vector<CopyEvent> none;
  while (next_period_ < period) {
    if ((*starting_)[static_cast<std::size_t>(next_period_)].empty()) {
      ++next_period_;
      continue;
    }
    if (!advance({}, none, evictions)) return false;
  }
  return true;
}

ReplicaTimeline derive_timeline(const Instance& instance, const Solution& solution) {
  const auto horizon = static_cast<std::size_t>(instance.horizon);
  std::vector<std::vector<ReplicaUse>> uses(horizon);
  for (const auto& a : solution.assignments) {
    if (!instance.has_content(a.content) || !instance.has_server(a.server)) {
      throw BrokenReference("assignment references an unknown server or content");
    }
    if (a.period < 0 || a.period >= instance.horizon) {
      throw BrokenReference("assignment period " + std::to_string(a.period) + " outside horizon");
    }
    for (auto r : a.requests) {
      if (!instance.has_request(r)) {
        throw BrokenReference("assignment references unknown request " + std::to_string(idx(r)));
      }
    }
    uses[static_cast<std::size_t>(a.period)].push_back({a.server, a.content});
  }

  ReplicaTimeline timeline;
  timeline.holdings.resize(horizon);
  timeline.hire_activity.resize(instance.servers.size());
  std::vector<int> first_held(instance.servers.size(), -1);
  std::vector<int> last_served(instance.servers.size(), -1);
  PlacementEngine engine(instance);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (!engine.advance(uses[t], timeline.copy_events, &timeline.evictions)) {
      const auto& f = engine.failure();
      if (f.no_source) {
        throw BrokenReference("content " + std::to_string(idx(f.content)) +
                              " has no replica at period " + std::to_string(f.period));
      }
      throw UnsatisfiableStorage(idx(f.server), idx(f.content), f.period);
    }
    auto& held = timeline.holdings[t];
    held.resize(instance.servers.size());
    for (const auto& s : instance.servers) {
      for (const auto& c : instance.contents) {
        if (engine.holds(s.id, c.id)) held[idx(s.id)].push_back(c.id);
      }
      if (s.pool == Pool::cloud && engine.held_count(s.id) > 0 && first_held[idx(s.id)] < 0) {
        first_held[idx(s.id)] = static_cast<int>(t);
      }
    }
  }
  for (const auto& a : solution.assignments) {
    last_served[idx(a.server)] = std::max(last_served[idx(a.server)], a.period);
  }
  for (const auto& s : instance.servers) {
    if (s.pool != Pool::cloud || first_held[idx(s.id)] < 0) continue;
    for (int t = first_held[idx(s.id)]; t <= last_served[idx(s.id)]; ++t) {
      timeline.hire_activity[idx(s.id)].push_back(t);
    }
  }
  return timeline;
}

UnsatisfiableStorage::UnsatisfiableStorage(std::size_t server_index, std::size_t content_index,
                                           int at_period)
    : Error("server " + std::to_string(server_index) + " cannot store content " +
            std::to_string(content_index) + " at period " + std::to_string(at_period)),
      server(server_index),
      content(content_index),
      period(at_period) {}

}  // namespace fchp
