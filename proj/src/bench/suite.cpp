#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "fchp/bench.hpp"
#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/exact.hpp"
#include "fchp/ils.hpp"
#include "fchp/io.hpp"

namespace fchp::bench {

namespace {

constexpr const char* kCsvHeader = "instance,method,servers_od,total,attend,repli,back,time_s,financial,gap_pct";
constexpr const char* kUnprovenExact = "exact-unproven";

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct Task {
  std::size_t instance = 0;
  std::string method;
  int run = 0;
};

struct TaskResult {
  bool ok = false;
  std::string error;
  CostBreakdown cost;
  double fleet = 0.0;
  double seconds = 0.0;
  bool proven = true;
  PeriodProfile profile;
};

AutoscalePolicy default_policy(const Instance& inst) {
  AutoscalePolicy policy;
  const ServerSpec* best = &inst.servers.front();
  for (const auto& s : inst.servers) {
    if (s.storage_mb > best->storage_mb) best = &s;
  }
  policy.machine_type = *best;
  return policy;
}

TaskResult run_task(const SuiteInstance& item, const Task& task, const SuiteOptions& options) {
  TaskResult out;
  const auto& inst = item.instance;
  const auto started = std::chrono::steady_clock::now();
  try {
    Solution solution;
    const Instance* profiled = &inst;
    std::optional<AutoscaleResult> scaled;
    if (task.method == "greedy") {
      Rng rng(derive_seed(options.seed, 0));
      solution = construct_solution(inst, rng);
      out.cost = evaluate(inst, solution);
    } else if (task.method == "ils") {
      IlsConfig cfg;
      cfg.iter_max = options.iter_max;
      cfg.level_max = options.level_max;
      cfg.delay_d = options.delay_d;
      cfg.seed = derive_seed(options.seed, static_cast<std::uint64_t>(task.run) + 1);
      cfg.threads = 1;
      auto result = ils_solve(inst, cfg);
      solution = std::move(result.best);
      out.cost = result.cost;
    } else if (task.method == "exact") {
      ExactOptions eo;
      eo.node_limit = options.node_limit;
      auto result = exact_solve(inst, eo);
      solution = std::move(result.solution);
      out.cost = evaluate(inst, solution);
      out.proven = result.proven;
    } else if (task.method == "autoscale") {
      scaled = autoscale_simulate(inst, options.autoscale ? *options.autoscale : default_policy(inst));
      solution = scaled->solution;
      out.cost = scaled->costs;
      profiled = &scaled->instance;
    } else {
      throw DomainError("unknown method '" + task.method + "'");
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    out.fleet = base_fleet_cost(inst) + out.cost.financial;
    out.profile = make_profile(*profiled, solution, item.label, task.method);
    if (scaled) {
      const auto origins = static_cast<int>(inst.servers_in(Pool::origin).size());
      for (std::size_t t = 0; t < scaled->active_servers.size(); ++t) {
        out.profile.cloud_active[t] = scaled->active_servers[t] - origins;
      }
    }
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double compute_gap(double heuristic_total, double reference_total) {
  if (!(reference_total > 0)) throw DomainError("gap reference must be > 0");
  const double pct = 100.0 * (heuristic_total - reference_total) / reference_total;
  return std::round(pct * 10.0) / 10.0;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, threads), std::max<std::size_t>(n, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PeriodProfile make_profile(const Instance& instance, const Solution& solution, std::string label,
                           std::string method) {
  const auto horizon = static_cast<std::size_t>(instance.horizon);
  PeriodProfile p;
  p.instance = std::move(label);
  p.method = std::move(method);
  p.arrived.assign(horizon, 0);
  p.served.assign(horizon, 0);
  p.waiting.assign(horizon, 0);
  p.cloud_active.assign(horizon, 0);
  for (const auto& r : instance.requests) ++p.arrived[static_cast<std::size_t>(r.arrival_period)];
  for (const auto& a : solution.assignments) {
    p.served[static_cast<std::size_t>(a.period)] += static_cast<int>(a.requests.size());
  }
  int backlog = 0;
  for (std::size_t t = 0; t < horizon; ++t) {
    backlog += p.arrived[t] - p.served[t];
    p.waiting[t] = backlog;
  }
  const auto timeline = derive_timeline(instance, solution);
  for (const auto& active : timeline.hire_activity) {
    for (int t : active) ++p.cloud_active[static_cast<std::size_t>(t)];
  }
  return p;
}

SuiteReport run_suite(const std::vector<SuiteInstance>& instances, const SuiteOptions& options) {
  for (const auto& m : options.methods) {
    if (m != "greedy" && m != "ils" && m != "exact" && m != "autoscale") {
      throw DomainError("unknown method '" + m + "'");
    }
  }
  if (options.ils_runs < 1) throw DomainError("ils_runs must be >= 1");

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& m : options.methods) {
      const int runs = m == "ils" ? options.ils_runs : 1;
      for (int r = 0; r < runs; ++r) tasks.push_back({i, m, r});
    }
  }
  std::vector<TaskResult> results(tasks.size());
  parallel_for(tasks.size(), options.threads, [&](std::size_t n) {
    results[n] = run_task(instances[tasks[n].instance], tasks[n], options);
  });

  SuiteReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    std::vector<ResultRow> rows;
    for (const auto& m : options.methods) {
      std::vector<const TaskResult*> runs;
      bool failed = false;
      for (std::size_t n = 0; n < tasks.size(); ++n) {
        if (tasks[n].instance != i || tasks[n].method != m) continue;
        if (!results[n].ok) {
          report.warnings.push_back(instances[i].label + " " + m + ": " + results[n].error);
          failed = true;
          break;
        }
        runs.push_back(&results[n]);
      }
      if (failed || runs.empty()) continue;

      std::vector<double> od, attend, repli, back, time, fin;
      for (const auto* r : runs) {
        od.push_back(r->cost.servers_od);
        attend.push_back(r->cost.attend);
        repli.push_back(r->cost.replication);
        back.push_back(r->cost.backlog);
        time.push_back(r->seconds);
        fin.push_back(r->fleet);
      }
      ResultRow row;
      row.instance = instances[i].label;
      row.method = m;
      row.servers_od = mean(od);
      row.attend = mean(attend);
      row.repli = mean(repli);
      row.back = mean(back);
      row.total = row.attend + row.repli + row.back;
      row.time_s = mean(time);
      row.financial = mean(fin);
      row.proven = runs.front()->proven;
      if (m == "exact" && !row.proven) row.method = kUnprovenExact;
      rows.push_back(row);
      report.profiles.push_back(runs.front()->profile);
    }
    const auto exact = std::find_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.method == "exact"; });
    if (exact != rows.end() && exact->total > 0) {
      for (auto& r : rows) {
        if (&r != &*exact) r.gap_pct = compute_gap(r.total, exact->total);
      }
    }
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

std::vector<SuiteInstance> load_suite(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("suite directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SuiteInstance> out;
  for (const auto& f : files) out.push_back({f.stem().string(), load_instance(f)});
  return out;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    const bool whole = std::floor(r.servers_od) == r.servers_od;
    out << r.instance << ',' << r.method << ',' << fmt(r.servers_od, whole ? 0 : 2) << ',' << fmt(r.total, 4)
        << ',' << fmt(r.attend, 4) << ',' << fmt(r.repli, 4) << ',' << fmt(r.back, 4) << ','
        << fmt(r.time_s, 3) << ',' << fmt(r.financial, 2) << ',' << (r.gap_pct ? fmt(*r.gap_pct, 1) : "") << '\n';
  }
  return out.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kCsvHeader, 0) != 0) {
    throw ParseError(std::string("results CSV must start with '") + kCsvHeader + "'");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 10) throw ParseError("results CSV row has " + std::to_string(f.size()) + " fields");
    try {
      ResultRow r;
      r.instance = f[0];
      r.method = f[1];
      r.servers_od = std::stod(f[2]);
      r.total = std::stod(f[3]);
      r.attend = std::stod(f[4]);
      r.repli = std::stod(f[5]);
      r.back = std::stod(f[6]);
      r.time_s = std::stod(f[7]);
      r.financial = std::stod(f[8]);
      if (!f[9].empty()) r.gap_pct = std::stod(f[9]);
      r.proven = r.method != kUnprovenExact;
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument&) {
      throw ParseError("results CSV row is not numeric: " + line);
    }
  }
  return rows;
}

std::string profiles_to_csv(const std::vector<PeriodProfile>& profiles) {
  std::ostringstream out;
  out << "instance,method,period,arrived,served,waiting,cloud_active\n";
  for (const auto& p : profiles) {
    for (std::size_t t = 0; t < p.arrived.size(); ++t) {
      out << p.instance << ',' << p.method << ',' << t << ',' << p.arrived[t] << ',' << p.served[t] << ','
          << p.waiting[t] << ',' << p.cloud_active[t] << '\n';
    }
  }
  return out.str();
}

}  // namespace fchp::bench
