#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fchp/instance.hpp"
#include "fchp/types.hpp"

namespace fchp {

struct CopyEvent {
  ContentId content{};
  ServerId source{};
  ServerId destination{};
  int period = 0;

  friend bool operator==(const CopyEvent&, const CopyEvent&) = default;
};

struct Eviction {
  ContentId content{};
  ServerId server{};
  int period = 0;

  friend bool operator==(const Eviction&, const Eviction&) = default;
};

/// A (server, content) pair used by some assignment in the current period.
struct ReplicaUse {
  ServerId server{};
  ContentId content{};
};

/// Replica placement over time, reconstructed from a Solution.
struct ReplicaTimeline {
  // holdings[t][j] = contents held by server j at the end of period t, ascending.
  std::vector<std::vector<std::vector<ContentId>>> holdings;
  std::vector<CopyEvent> copy_events;
  std::vector<Eviction> evictions;
  // hire_activity[j] = active periods of cloud server j: from its first
  // replica through the last period it serves. Empty for origin servers and
  // for cloud servers that never serve.
  std::vector<std::vector<int>> hire_activity;
};

/// Period-by-period replica bookkeeping shared by evaluation, construction
/// and the exact search. The state is a plain value: copying it checkpoints it.
///
/// At each period: contents starting now appear on their origin (and preload)
/// servers; every replica used this period has its recency set to the period;
/// each missing (server, content) pair receives one copy, sourced from the
/// content's origin when it holds a replica, else the lowest-id holder. When a
/// destination lacks storage, replicas on it are evicted least-recently-used
/// first, never a sole replica and never one used (or copied from) this period.
class PlacementEngine {
 public:
  static constexpr int kAbsent = -2;
  static constexpr int kNeverUsed = -1;

  explicit PlacementEngine(const Instance& instance);

  int next_period() const { return next_period_; }

  bool holds(ServerId server, ContentId content) const {
    return last_used_[slot(server, content)] != kAbsent;
  }
  int replica_count(ContentId content) const { return replica_count_[idx(content)]; }
  int held_count(ServerId server) const { return held_count_[idx(server)]; }
  double free_mb(ServerId server) const { return free_mb_[idx(server)]; }
  int last_used(ServerId server, ContentId content) const { return last_used_[slot(server, content)]; }

  /// Processes period `next_period()`. `uses` may contain duplicates and is
  /// reordered in place. Copy events and (optionally) evictions are appended.
  /// Returns false when a placement cannot fit; failure() then names it and
  /// the state is no longer meaningful.
  [[nodiscard]] bool advance(std::span<ReplicaUse> uses, std::vector<CopyEvent>& copies,
                             std::vector<Eviction>* evictions = nullptr);

  /// Advances through periods with no uses up to (excluding) `period`.
  [[nodiscard]] bool skip_to(int period, std::vector<Eviction>* evictions = nullptr);

  struct Failure {
    ServerId server{};
    ContentId content{};
    int period = 0;
    bool no_source = false;  // content had no replica to copy from
  };
  const Failure& failure() const { return failure_; }

 private:
  std::size_t slot(ServerId s, ContentId k) const { return idx(s) * contents_ + idx(k); }
  bool place(ServerId server, ContentId content, int recency, std::vector<Eviction>* evictions);

  const Instance* instance_;
  std::size_t contents_;
  int next_period_ = 0;
  std::vector<int> last_used_;
  std::vector<char> protected_;
  std::vector<int> replica_count_;
  std::vector<int> held_count_;
  std::vector<double> free_mb_;
  // contents grouped by start period
  std::shared_ptr<const std::vector<std::vector<ContentId>>> starting_;
  std::vector<std::size_t> protected_slots_;
  std::vector<ServerId> sources_;
  Failure failure_;
};

/// Throws BrokenReference on unresolved ids and UnsatisfiableStorage when a
/// needed placement cannot fit even after all permitted evictions.
ReplicaTimeline derive_timeline(const Instance& instance, const Solution& solution);

}  // namespace fchp
