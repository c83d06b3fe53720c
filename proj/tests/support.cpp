#include "support.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "fchp/evaluate.hpp"

namespace fchp::testing {

namespace {

int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

int first_period(const Instance& inst, const Request& r) {
  return std::max(r.arrival_period, inst.content(r.content).start_period);
}

}  // namespace

Builder& Builder::origin(double storage_mb, double bandwidth_mb, double price) {
  const auto j = instance.servers.size();
  instance.servers.push_back({server_id(j), "origin-" + std::to_string(j), Pool::origin, storage_mb, bandwidth_mb, price});
  return *this;
}

Builder& Builder::cloud(double storage_mb, double bandwidth_mb, double price) {
  const auto j = instance.servers.size();
  instance.servers.push_back({server_id(j), "cloud-" + std::to_string(j), Pool::cloud, storage_mb, bandwidth_mb, price});
  return *this;
}

Builder& Builder::content(double size_mb, std::size_t origin, int start) {
  const auto k = instance.contents.size();
  Content c;
  c.id = content_id(k);
  c.name = "c" + std::to_string(k);
  c.size_mb = size_mb;
  c.start_period = start;
  c.origin_server = server_id(origin);
  instance.contents.push_back(c);
  return *this;
}

Builder& Builder::request(std::size_t content, int arrival) {
  instance.requests.push_back({request_id(instance.requests.size()), content_id(content), arrival});
  return *this;
}

Builder& Builder::horizon(int periods) {
  instance.horizon = periods;
  return *this;
}

Instance Builder::build() {
  Instance out = instance;
  out.apply_default_costs();
  out.validate();
  return out;
}

CorpusLimits tiny_limits() {
  CorpusLimits l;
  l.max_origin = 1;
  l.max_cloud = 2;
  l.max_servers = 3;
  l.max_contents = 2;
  l.min_requests = 2;
  l.max_requests = 8;
  l.max_horizon = 3;
  l.late_starts = false;
  return l;
}

Instance random_instance(std::uint64_t seed, const CorpusLimits& limits) {
  Rng rng(seed);
  Instance inst;
  inst.horizon = pick(rng, 2, limits.max_horizon);
  inst.period_seconds = 3600.0;

  const int n_origin = pick(rng, 1, limits.max_origin);
  const int n_cloud = std::min(pick(rng, 0, limits.max_cloud), limits.max_servers - n_origin);
  const int n_contents = pick(rng, 1, limits.max_contents);

  std::vector<double> sizes;
  for (int k = 0; k < n_contents; ++k) sizes.push_back(100.0 * pick(rng, 2, 6));
  const double largest = *std::max_element(sizes.begin(), sizes.end());

  for (int j = 0; j < n_origin + n_cloud; ++j) {
    ServerSpec s;
    s.id = server_id(static_cast<std::size_t>(j));
    s.pool = j < n_origin ? Pool::origin : Pool::cloud;
    s.name = (s.pool == Pool::origin ? "origin-" : "cloud-") + std::to_string(j);
    s.bandwidth_mb = largest + 100.0 * pick(rng, 0, 8);
    s.price_per_period = s.pool == Pool::origin ? 2.0 : 1.0;
    // origin storage is fixed below once the holdings are known
    s.storage_mb = largest + 100.0 * pick(rng, 0, 6);
    inst.servers.push_back(s);
  }

  std::vector<double> origin_load(static_cast<std::size_t>(n_origin), 0.0);
  for (int k = 0; k < n_contents; ++k) {
    Content c;
    c.id = content_id(static_cast<std::size_t>(k));
    c.name = "c" + std::to_string(k);
    c.size_mb = sizes[static_cast<std::size_t>(k)];
    c.origin_server = server_id(static_cast<std::size_t>(pick(rng, 0, n_origin - 1)));
    origin_load[idx(c.origin_server)] += c.size_mb;
    for (int j = 0; j < n_origin; ++j) {
      if (server_id(static_cast<std::size_t>(j)) != c.origin_server && rng.uniform() < 0.5) {
        c.preload.push_back(server_id(static_cast<std::size_t>(j)));
        origin_load[static_cast<std::size_t>(j)] += c.size_mb;
      }
    }
    if (limits.late_starts && rng.uniform() < 0.3) c.start_period = pick(rng, 0, inst.horizon - 1);
    inst.contents.push_back(c);
  }
  for (int j = 0; j < n_origin; ++j) {
    auto& s = inst.servers[static_cast<std::size_t>(j)];
    s.storage_mb = std::max(s.storage_mb, origin_load[static_cast<std::size_t>(j)] + 100.0 * pick(rng, 0, 3));
  }

  const int n_requests = pick(rng, limits.min_requests, limits.max_requests);
  for (int i = 0; i < n_requests; ++i) {
    const auto k = content_id(static_cast<std::size_t>(pick(rng, 0, n_contents - 1)));
    Request r;
    r.id = request_id(static_cast<std::size_t>(i));
    r.content = k;
    r.arrival_period = pick(rng, inst.content(k).start_period, inst.horizon - 1);
    inst.requests.push_back(r);
  }

  inst.costs.backlog_rho = 2.0;
  if (rng.uniform() < 0.25) {
    const auto i = static_cast<std::size_t>(pick(rng, 0, n_requests - 1));
    inst.costs.backlog_overrides.push_back(
        {request_id(i), inst.requests[i].arrival_period, 1.0 + static_cast<double>(pick(rng, 0, 20))});
  }
  inst.apply_default_costs();
  inst.validate();
  return inst;
}

std::optional<Solution> random_feasible_solution(const Instance& instance, Rng& rng, int tries) {
  for (int attempt = 0; attempt < tries; ++attempt) {
    std::map<std::tuple<int, std::size_t, std::size_t>, std::vector<RequestId>> groups;
    for (const auto& r : instance.requests) {
      const int t = pick(rng, first_period(instance, r), instance.horizon - 1);
      const auto j = static_cast<std::size_t>(rng.below(instance.servers.size()));
      groups[{t, j, idx(r.content)}].push_back(r.id);
    }
    Solution s;
    for (auto& [key, reqs] : groups) {
      const auto [t, j, k] = key;
      rng.shuffle(std::span<RequestId>(reqs));
      // occasionally split one group into two tuples on the same server
      std::size_t cut = reqs.size();
      if (reqs.size() > 1 && rng.uniform() < 0.3) cut = static_cast<std::size_t>(pick(rng, 1, static_cast<int>(reqs.size()) - 1));
      s.assignments.push_back({content_id(k), server_id(j), {reqs.begin(), reqs.begin() + static_cast<long>(cut)}, t});
      if (cut < reqs.size()) {
        s.assignments.push_back({content_id(k), server_id(j), {reqs.begin() + static_cast<long>(cut), reqs.end()}, t});
      }
    }
    rng.shuffle(std::span<Assignment>(s.assignments));
    if (check_feasibility(instance, s).empty()) return s;
  }
  return std::nullopt;
}

OracleCost oracle_objective(const Instance& inst, const Solution& sol) {
  const std::size_t R = inst.requests.size();
  const std::size_t S = inst.servers.size();
  const std::size_t C = inst.contents.size();
  const std::size_t T = static_cast<std::size_t>(inst.horizon);

  // x[i][j][t] and b[i][t]
  std::vector<std::vector<std::vector<int>>> x(R, std::vector<std::vector<int>>(S, std::vector<int>(T, 0)));
  std::vector<int> serve(R, -1);
  for (const auto& a : sol.assignments) {
    for (auto i : a.requests) {
      x[idx(i)][idx(a.server)][static_cast<std::size_t>(a.period)] = 1;
      serve[idx(i)] = a.period;
    }
  }
  std::vector<std::vector<int>> b(R, std::vector<int>(T, 0));
  for (std::size_t i = 0; i < R; ++i) {
    for (int t = inst.requests[i].arrival_period; t < serve[i]; ++t) b[i][static_cast<std::size_t>(t)] = 1;
  }

  // w[k][l][j][t]: copy of k from l to j at t
  std::vector<std::vector<std::vector<std::vector<int>>>> w(
      C, std::vector<std::vector<std::vector<int>>>(S, std::vector<std::vector<int>>(S, std::vector<int>(T, 0))));
  std::vector<std::map<std::size_t, int>> held(S);  // content -> recency
  OracleCost out;

  auto holders = [&](std::size_t k) {
    int n = 0;
    for (const auto& h : held) n += static_cast<int>(h.count(k));
    return n;
  };
  auto used_mb = [&](std::size_t j) {
    double mb = 0.0;
    for (const auto& [k, rec] : held[j]) mb += inst.contents[k].size_mb;
    return mb;
  };
  std::set<std::pair<std::size_t, std::size_t>> guarded;
  auto place = [&](std::size_t j, std::size_t k, int recency) {
    while (inst.servers[j].storage_mb - used_mb(j) + 1e-9 < inst.contents[k].size_mb) {
      std::optional<std::size_t> victim;
      for (const auto& [c, rec] : held[j]) {
        if (guarded.count({j, c}) || holders(c) <= 1) continue;
        if (!victim || rec < held[j][*victim]) victim = c;
      }
      if (!victim) {
        out.storage_ok = false;
        return;
      }
      held[j].erase(*victim);
    }
    held[j][k] = recency;
  };

  for (std::size_t t = 0; t < T && out.storage_ok; ++t) {
    guarded.clear();
    for (std::size_t k = 0; k < C; ++k) {
      const auto& c = inst.contents[k];
      if (static_cast<std::size_t>(c.start_period) != t) continue;
      if (!held[idx(c.origin_server)].count(k)) place(idx(c.origin_server), k, -1);
      for (auto p : c.preload) {
        if (!held[idx(p)].count(k)) place(idx(p), k, -1);
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> used;  // (server, content)
    for (const auto& a : sol.assignments) {
      if (static_cast<std::size_t>(a.period) == t) used.insert({idx(a.server), idx(a.content)});
    }
    for (const auto& [j, k] : used) {
      if (held[j].count(k)) {
        held[j][k] = static_cast<int>(t);
        guarded.insert({j, k});
      }
    }
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> copies;  // (k, source, dest)
    for (const auto& [j, k] : used) {
      if (held[j].count(k)) continue;
      std::size_t src = idx(inst.contents[k].origin_server);
      if (!held[src].count(k)) {
        src = S;
        for (std::size_t l = 0; l < S && src == S; ++l) {
          if (held[l].count(k)) src = l;
        }
      }
      if (src == S) {
        out.storage_ok = false;
        break;
      }
      guarded.insert({src, k});
      copies.emplace_back(k, src, j);
    }
    for (const auto& [k, src, j] : copies) {
      if (!out.storage_ok) break;
      place(j, k, static_cast<int>(t));
      guarded.insert({j, k});
      w[k][src][j][t] = 1;
    }
  }

  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      for (std::size_t t = 0; t < T; ++t) out.attend += inst.costs.attend[i] * x[i][j][t];
    }
    for (std::size_t t = 0; t < T; ++t) {
      if (!b[i][t]) continue;
      double p = inst.costs.backlog_rho * inst.costs.attend[i];
      for (const auto& o : inst.costs.backlog_overrides) {
        if (idx(o.request) == i && static_cast<std::size_t>(o.period) == t) p = o.penalty;
      }
      out.backlog += p;
    }
  }
  for (std::size_t k = 0; k < C; ++k) {
    for (std::size_t l = 0; l < S; ++l) {
      for (std::size_t j = 0; j < S; ++j) {
        for (std::size_t t = 0; t < T; ++t) out.replication += inst.costs.copy[k] * w[k][l][j][t];
      }
    }
  }
  out.total = out.attend + out.backlog + out.replication;
  return out;
}

std::optional<double> brute_force_optimum(const Instance& instance) {
  Evaluator evaluator(instance);
  const std::size_t R = instance.requests.size();
  std::vector<std::pair<std::size_t, int>> choice(R);
  std::vector<double> load(instance.servers.size() * static_cast<std::size_t>(instance.horizon), 0.0);
  std::optional<double> best;

  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == R) {
      std::map<std::tuple<int, std::size_t, std::size_t>, std::vector<RequestId>> groups;
      for (std::size_t r = 0; r < R; ++r) {
        groups[{choice[r].second, choice[r].first, idx(instance.requests[r].content)}].push_back(request_id(r));
      }
      Solution s;
      for (auto& [key, reqs] : groups) {
        s.assignments.push_back({content_id(std::get<2>(key)), server_id(std::get<1>(key)), reqs, std::get<0>(key)});
      }
      const auto total = evaluator.feasible_total(s);
      if (total && (!best || *total < *best)) best = total;
      return;
    }
    const auto& req = instance.requests[i];
    const double size = instance.content(req.content).size_mb;
    for (int t = first_period(instance, req); t < instance.horizon; ++t) {
      for (std::size_t j = 0; j < instance.servers.size(); ++j) {
        auto& l = load[j * static_cast<std::size_t>(instance.horizon) + static_cast<std::size_t>(t)];
        if (l + size > instance.servers[j].bandwidth_mb + 1e-9) continue;
        l += size;
        choice[i] = {j, t};
        rec(i + 1);
        l -= size;
      }
    }
  };
  rec(0);
  return best;
}

std::int64_t count_bandwidth_feasible_prefixes(const Instance& instance) {
  std::vector<const Request*> order;
  for (const auto& r : instance.requests) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const Request* a, const Request* b) {
    return std::make_pair(a->arrival_period, idx(a->id)) < std::make_pair(b->arrival_period, idx(b->id));
  });
  std::vector<double> load(instance.servers.size() * static_cast<std::size_t>(instance.horizon), 0.0);
  std::int64_t count = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t pos) {
    if (pos == order.size()) return;
    const auto& req = *order[pos];
    const double size = instance.content(req.content).size_mb;
    for (int t = first_period(instance, req); t < instance.horizon; ++t) {
      for (std::size_t j = 0; j < instance.servers.size(); ++j) {
        auto& l = load[j * static_cast<std::size_t>(instance.horizon) + static_cast<std::size_t>(t)];
        if (l + size > instance.servers[j].bandwidth_mb + 1e-9) continue;
        ++count;
        l += size;
        rec(pos + 1);
        l -= size;
      }
    }
  };
  rec(0);
  return count;
}

}  // namespace fchp::testing
