#include "fchp/evaluate.hpp"

#include <algorithm>
#include <sstream>

#include "fchp/errors.hpp"

namespace fchp {

namespace {

constexpr double kBandwidthSlack = 1e-9;

std::string number(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

}  // namespace

const char* to_string(Rule rule) {
  switch (rule) {
    case Rule::Unattended: return "Unattended";
    case Rule::DuplicateAssignment: return "DuplicateAssignment";
    case Rule::UnknownReference: return "UnknownReference";
    case Rule::EmptyAssignment: return "EmptyAssignment";
    case Rule::ContentMismatch: return "ContentMismatch";
    case Rule::ServedBeforeArrival: return "ServedBeforeArrival";
    case Rule::ContentNotStarted: return "ContentNotStarted";
    case Rule::PeriodOutOfRange: return "PeriodOutOfRange";
    case Rule::BandwidthExceeded: return "BandwidthExceeded";
    case Rule::StorageExceeded: return "StorageExceeded";
    case Rule::ReplicaMissing: return "ReplicaMissing";
  }
  return "Unknown";
}

std::string Violation::to_string() const {
  std::ostringstream out;
  out << fchp::to_string(rule);
  if (server) out << " server=" << *server;
  if (content) out << " content=" << *content;
  if (request) out << " request=" << *request;
  if (period) out << " period=" << *period;
  if (!detail.empty()) out << ' ' << detail;
  return out.str();
}

Evaluator::Evaluator(const Instance& instance)
    : instance_(&instance),
      costs_(instance),
      by_period_(static_cast<std::size_t>(instance.horizon)),
      load_(instance.servers.size(), 0.0),
      serve_period_(instance.requests.size(), -1),
      first_held_(instance.servers.size(), -1),
      last_served_(instance.servers.size(), -1) {}

bool Evaluator::simulate(const Solution& solution, bool want_hires) {
  for (auto& bucket : by_period_) bucket.clear();
  std::fill(serve_period_.begin(), serve_period_.end(), -1);
  std::fill(first_held_.begin(), first_held_.end(), -1);
  std::fill(last_served_.begin(), last_served_.end(), -1);
  copies_.clear();

  const auto& assignments = solution.assignments;
  for (std::size_t a = 0; a < assignments.size(); ++a) {
    const auto& as = assignments[a];
    by_period_[static_cast<std::size_t>(as.period)].push_back(a);
    for (auto r : as.requests) serve_period_[idx(r)] = as.period;
  }

  PlacementEngine engine(*instance_);
  std::vector<ReplicaUse> uses;
  for (std::size_t t = 0; t < by_period_.size(); ++t) {
    uses.clear();
    for (auto a : by_period_[t]) {
      const auto& as = assignments[a];
      uses.push_back({as.server, as.content});
      load_[idx(as.server)] += instance_->content(as.content).size_mb *
                               static_cast<double>(as.requests.size());
    }
    bool ok = true;
    for (auto a : by_period_[t]) {
      const auto j = idx(assignments[a].server);
      if (load_[j] > instance_->servers[j].bandwidth_mb + kBandwidthSlack) ok = false;
    }
    for (auto a : by_period_[t]) load_[idx(assignments[a].server)] = 0.0;
    if (!ok || !engine.advance(uses, copies_)) return false;
    if (want_hires) {
      for (const auto& s : instance_->servers) {
        if (s.pool == Pool::cloud && first_held_[idx(s.id)] < 0 && engine.held_count(s.id) > 0) {
          first_held_[idx(s.id)] = static_cast<int>(t);
        }
      }
      for (auto a : by_period_[t]) last_served_[idx(assignments[a].server)] = static_cast<int>(t);
    }
  }
  return true;
}

std::optional<CostBreakdown> Evaluator::try_evaluate(const Solution& solution) {
  if (!simulate(solution, true)) return std::nullopt;
  CostBreakdown out;
  for (std::size_t i = 0; i < serve_period_.size(); ++i) {
    if (serve_period_[i] < 0) continue;
    out.attend += costs_.attend(request_id(i));
    out.backlog += costs_.waiting(request_id(i), serve_period_[i]);
  }
  for (const auto& c : copies_) out.replication += costs_.copy(c.content);
  out.total = out.attend + out.backlog + out.replication;
  for (const auto& s : instance_->servers) {
    const int first = first_held_[idx(s.id)];
    const int active = first < 0 ? 0 : std::max(0, last_served_[idx(s.id)] - first + 1);
    if (active > 0) {
      ++out.servers_od;
      out.financial += s.price_per_period * active;
    }
  }
  return out;
}

std::optional<double> Evaluator::feasible_total(const Solution& solution) {
  if (!simulate(solution, false)) return std::nullopt;
  double attend = 0.0;
  double backlog = 0.0;
  double replication = 0.0;
  for (std::size_t i = 0; i < serve_period_.size(); ++i) {
    if (serve_period_[i] < 0) continue;
    attend += costs_.attend(request_id(i));
    backlog += costs_.waiting(request_id(i), serve_period_[i]);
  }
  for (const auto& c : copies_) replication += costs_.copy(c.content);
  return attend + backlog + replication;
}

CostBreakdown evaluate(const Instance& instance, const Solution& solution) {
  std::vector<int> seen(instance.requests.size(), 0);
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
      if (++seen[idx(r)] > 1) {
        throw IncompleteSolution("request " + std::to_string(idx(r)) + " is assigned more than once");
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] == 0) throw IncompleteSolution("request " + std::to_string(i) + " is unassigned");
  }

  // Bandwidth is deliberately not enforced here: the result is the objective
  // of the represented plan. Storage is structural and must hold.
  ReplicaTimeline timeline = derive_timeline(instance, solution);
  CostModel costs(instance);
  CostBreakdown out;
  std::vector<int> serve(instance.requests.size(), 0);
  for (const auto& a : solution.assignments) {
    for (auto r : a.requests) serve[idx(r)] = a.period;
  }
  for (std::size_t i = 0; i < serve.size(); ++i) {
    out.attend += costs.attend(request_id(i));
    out.backlog += costs.waiting(request_id(i), serve[i]);
  }
  for (const auto& c : timeline.copy_events) out.replication += costs.copy(c.content);
  out.total = out.attend + out.backlog + out.replication;
  for (const auto& s : instance.servers) {
    const auto& active = timeline.hire_activity[idx(s.id)];
    if (s.pool == Pool::cloud && !active.empty()) {
      ++out.servers_od;
      out.financial += s.price_per_period * static_cast<double>(active.size());
    }
  }
  return out;
}

std::vector<Violation> check_feasibility(const Instance& instance, const Solution& solution) {
  std::vector<Violation> out;
  std::vector<int> seen(instance.requests.size(), 0);
  std::vector<char> well_formed(solution.assignments.size(), 1);

  for (std::size_t a = 0; a < solution.assignments.size(); ++a) {
    const auto& as = solution.assignments[a];
    auto broken = [&](Violation v) {
      well_formed[a] = 0;
      out.push_back(std::move(v));
    };
    const bool refs_ok = instance.has_content(as.content) && instance.has_server(as.server);
    if (!refs_ok) {
      broken({Rule::UnknownReference, idx(as.server), idx(as.content), std::nullopt, as.period,
              "assignment=" + std::to_string(a)});
    }
    if (as.period < 0 || as.period >= instance.horizon) {
      broken({Rule::PeriodOutOfRange, std::nullopt, std::nullopt, std::nullopt, as.period,
              "assignment=" + std::to_string(a)});
    }
    if (as.requests.empty()) {
      broken({Rule::EmptyAssignment, idx(as.server), idx(as.content), std::nullopt, as.period,
              "assignment=" + std::to_string(a)});
    }
    if (refs_ok && as.period < instance.content(as.content).start_period) {
      broken({Rule::ContentNotStarted, std::nullopt, idx(as.content), std::nullopt, as.period, ""});
    }
    for (auto r : as.requests) {
      if (!instance.has_request(r)) {
        broken({Rule::UnknownReference, std::nullopt, std::nullopt, idx(r), as.period, ""});
        continue;
      }
      ++seen[idx(r)];
      const auto& req = instance.request(r);
      if (req.content != as.content) {
        broken({Rule::ContentMismatch, std::nullopt, idx(as.content), idx(r), as.period,
                "wants=" + std::to_string(idx(req.content))});
      }
      if (as.period < req.arrival_period) {
        broken({Rule::ServedBeforeArrival, std::nullopt, std::nullopt, idx(r), as.period,
                "arrival=" + std::to_string(req.arrival_period)});
      }
    }
  }

  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] == 0) {
      out.push_back({Rule::Unattended, std::nullopt, std::nullopt, i, std::nullopt, ""});
    } else if (seen[i] > 1) {
      out.push_back({Rule::DuplicateAssignment, std::nullopt, std::nullopt, i, std::nullopt,
                     "count=" + std::to_string(seen[i])});
    }
  }

  // Capacity rules over the well-formed part of the plan.
  const auto horizon = static_cast<std::size_t>(instance.horizon);
  std::vector<std::vector<std::size_t>> by_period(horizon);
  for (std::size_t a = 0; a < solution.assignments.size(); ++a) {
    if (well_formed[a]) by_period[static_cast<std::size_t>(solution.assignments[a].period)].push_back(a);
  }
  PlacementEngine engine(instance);
  std::vector<CopyEvent> copies;
  std::vector<ReplicaUse> uses;
  std::vector<double> load(instance.servers.size(), 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    uses.clear();
    std::fill(load.begin(), load.end(), 0.0);
    for (auto a : by_period[t]) {
      const auto& as = solution.assignments[a];
      uses.push_back({as.server, as.content});
      load[idx(as.server)] +=
          instance.content(as.content).size_mb * static_cast<double>(as.requests.size());
    }
    for (const auto& s : instance.servers) {
      if (load[idx(s.id)] > s.bandwidth_mb + kBandwidthSlack) {
        out.push_back({Rule::BandwidthExceeded, idx(s.id), std::nullopt, std::nullopt,
                       static_cast<int>(t),
                       "load_mb=" + number(load[idx(s.id)]) + " capacity_mb=" + number(s.bandwidth_mb)});
      }
    }
    if (!engine.advance(uses, copies)) {
      const auto& f = engine.failure();
      if (f.no_source) {
        out.push_back({Rule::ReplicaMissing, idx(f.server), idx(f.content), std::nullopt, f.period,
                       "no replica to copy from"});
      } else {
        out.push_back({Rule::StorageExceeded, idx(f.server), idx(f.content), std::nullopt, f.period,
                       "no evictable replica frees enough storage"});
      }
      break;
    }
    for (const auto& as_index : by_period[t]) {
      const auto& as = solution.assignments[as_index];
      if (!engine.holds(as.server, as.content)) {
        out.push_back({Rule::ReplicaMissing, idx(as.server), idx(as.content), std::nullopt,
                       static_cast<int>(t), "serving server lacks the content"});
      }
    }
    for (const auto& c : instance.contents) {
      if (c.start_period <= static_cast<int>(t) && engine.replica_count(c.id) < 1) {
        out.push_back({Rule::ReplicaMissing, std::nullopt, idx(c.id), std::nullopt,
                       static_cast<int>(t), "content has no replica"});
      }
    }
  }
  return out;
}

}  // namespace fchp
