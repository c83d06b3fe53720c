#include "fchp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/rng.hpp"

namespace fchp {

namespace {

constexpr double kBandwidthSlack = 1e-9;

std::vector<std::vector<char>> initial_holders(const Instance& inst) {
  std::vector<std::vector<char>> held(inst.contents.size(), std::vector<char>(inst.servers.size(), 0));
  for (const auto& c : inst.contents) {
    held[idx(c.id)][idx(c.origin_server)] = 1;
    for (auto j : c.preload) held[idx(c.id)][idx(j)] = 1;
  }
  return held;
}

int first_period(const Instance& inst, const Request& r) {
  return std::max(r.arrival_period, inst.content(r.content).start_period);
}

Solution assemble(const Instance& inst, const std::vector<RequestId>& order,
                  const std::vector<std::pair<ServerId, int>>& chosen) {
  std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> slot;
  Solution out;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const auto& req = inst.request(order[p]);
    const auto [server, period] = chosen[p];
    const auto key = std::make_tuple(period, idx(server), idx(req.content));
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, out.assignments.size());
      out.assignments.push_back({req.content, server, {req.id}, period});
    } else {
      out.assignments[it->second].requests.push_back(req.id);
    }
  }
  canonicalize(out);
  return out;
}

class Search {
 public:
  Search(const Instance& inst, const ExactOptions& options)
      : inst_(inst), options_(options), costs_(inst), evaluator_(inst), held_(initial_holders(inst)) {
    for (const auto& r : inst.requests) order_.push_back(r.id);
    std::stable_sort(order_.begin(), order_.end(), [&](RequestId a, RequestId b) {
      return inst.request(a).arrival_period < inst.request(b).arrival_period;
    });
    const std::size_t n = order_.size();
    suffix_attend_.assign(n + 1, 0.0);
    for (std::size_t p = n; p-- > 0;) suffix_attend_[p] = suffix_attend_[p + 1] + costs_.attend(order_[p]);
    twin_of_prev_.assign(n, false);
    for (std::size_t p = 1; p < n; ++p) twin_of_prev_[p] = interchangeable(order_[p - 1], order_[p]);
    load_.assign(inst.servers.size() * static_cast<std::size_t>(inst.horizon), 0.0);
    uses_.assign(inst.contents.size() * inst.servers.size(), 0);
    chosen_.resize(n);
  }

  void seed(const Solution& s, double cost) {
    best_ = cost;
    best_solution_ = s;
  }

  ExactResult run() {
    dfs(0);
    if (!best_) {
      if (budget_hit_) throw BudgetExhausted("node limit reached before any feasible plan was found");
      throw Infeasible("no feasible plan exists within the horizon");
    }
    return {best_solution_, *best_, !budget_hit_, nodes_};
  }

 private:
  bool interchangeable(RequestId a, RequestId b) const {
    const auto& ra = inst_.request(a);
    const auto& rb = inst_.request(b);
    if (ra.content != rb.content || ra.arrival_period != rb.arrival_period) return false;
    if (costs_.attend(a) != costs_.attend(b)) return false;
    for (int t = ra.arrival_period; t < inst_.horizon; ++t) {
      if (costs_.waiting(a, t) != costs_.waiting(b, t)) return false;
    }
    return true;
  }

  std::size_t load_at(ServerId j, int t) const {
    return idx(j) * static_cast<std::size_t>(inst_.horizon) + static_cast<std::size_t>(t);
  }
  std::size_t pair_at(ContentId k, ServerId j) const { return idx(k) * inst_.servers.size() + idx(j); }

  bool needs_copy(ContentId k, ServerId j) const {
    return uses_[pair_at(k, j)] == 0 && held_[idx(k)][idx(j)] == 0;
  }

  struct Child {
    ServerId server;
    int period;
    double step;
  };

  void dfs(std::size_t pos) {
    if (pos == order_.size()) {
      leaf();
      return;
    }
    const auto& req = inst_.request(order_[pos]);
    const double size = inst_.content(req.content).size_mb;

    std::vector<Child> children;
    for (int t = first_period(inst_, req); t < inst_.horizon; ++t) {
      for (const auto& s : inst_.servers) {
        if (twin_of_prev_[pos] && options_.break_symmetry &&
            std::make_pair(t, idx(s.id)) < std::make_pair(chosen_[pos - 1].second, idx(chosen_[pos - 1].first))) {
          continue;
        }
        if (load_[load_at(s.id, t)] + size > s.bandwidth_mb + kBandwidthSlack) continue;
        double step = costs_.attend(req.id) + costs_.waiting(req.id, t);
        if (needs_copy(req.content, s.id)) step += costs_.copy(req.content);
        children.push_back({s.id, t, step});
      }
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) { return a.step < b.step; });

    for (const auto& c : children) {
      if (nodes_ >= options_.node_limit) {
        budget_hit_ = true;
        return;
      }
      ++nodes_;
      const double bound = accumulated_ + c.step + suffix_attend_[pos + 1];
      if (options_.prune_bound && best_ && !(bound < *best_ - 1e-9 * std::max(1.0, std::abs(*best_)))) {
        continue;
      }
      chosen_[pos] = {c.server, c.period};
      load_[load_at(c.server, c.period)] += size;
      ++uses_[pair_at(req.content, c.server)];
      accumulated_ += c.step;
      dfs(pos + 1);
      accumulated_ -= c.step;
      --uses_[pair_at(req.content, c.server)];
      load_[load_at(c.server, c.period)] -= size;
      if (budget_hit_) return;
    }
  }

  void leaf() {
    Solution s = assemble(inst_, order_, chosen_);
    const auto total = evaluator_.feasible_total(s);
    if (!total) return;
    if (!best_ || *total < *best_ - 1e-9 * std::max(1.0, std::abs(*best_))) {
      best_ = *total;
      best_solution_ = std::move(s);
    }
  }

  const Instance& inst_;
  ExactOptions options_;
  CostModel costs_;
  Evaluator evaluator_;
  std::vector<std::vector<char>> held_;
  std::vector<RequestId> order_;
  std::vector<double> suffix_attend_;
  std::vector<bool> twin_of_prev_;
  std::vector<double> load_;
  std::vector<int> uses_;
  std::vector<std::pair<ServerId, int>> chosen_;
  double accumulated_ = 0.0;
  std::int64_t nodes_ = 0;
  bool budget_hit_ = false;
  std::optional<double> best_;
  Solution best_solution_;
};

}  // namespace

double lower_bound(const Instance& instance, const PartialAssignment& partial) {
  if (partial.choice.size() != instance.requests.size()) {
    throw DomainError("partial assignment must cover every request slot");
  }
  const CostModel costs(instance);
  const auto held = initial_holders(instance);
  std::vector<std::vector<char>> counted(instance.contents.size(), std::vector<char>(instance.servers.size(), 0));
  double bound = 0.0;
  for (const auto& r : instance.requests) {
    bound += costs.attend(r.id);
    const auto& c = partial.choice[idx(r.id)];
    if (!c) continue;
    bound += costs.waiting(r.id, c->second);
    const auto k = idx(r.content);
    const auto j = idx(c->first);
    if (held[k][j] == 0 && counted[k][j] == 0) {
      counted[k][j] = 1;
      bound += costs.copy(r.content);
    }
  }
  return bound;
}

ExactResult exact_solve(const Instance& instance, const ExactOptions& options) {
  if (options.node_limit < 1) throw DomainError("node_limit must be >= 1");
  Search search(instance, options);
  if (options.seed_with_greedy && options.prune_bound) {
    try {
      Rng rng(0);
      Solution greedy = construct_solution(instance, rng);
      Evaluator evaluator(instance);
      if (const auto total = evaluator.feasible_total(greedy)) search.seed(greedy, *total);
    } catch (const Infeasible&) {
      // the search decides feasibility on its own
    }
  }
  return search.run();
}

}  // namespace fchp
