#include "fchp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fchp/bench.hpp"
#include "fchp/construct.hpp"
#include "fchp/errors.hpp"
#include "fchp/evaluate.hpp"
#include "fchp/exact.hpp"
#include "fchp/ils.hpp"
#include "fchp/io.hpp"
#include "fchp/tracegen.hpp"

namespace fchp::cli {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

Json meta(const std::string& command) { return {{"tool", "fchp"}, {"command", command}}; }

Json stats_to_json(const RunStats& stats) {
  Json starts = Json::array();
  for (const auto& s : stats.starts) {
    Json accepted = Json::object();
    for (auto n : kAllNeighborhoods) accepted[to_string(n)] = s.rvnd.accepted[static_cast<std::size_t>(n)];
    Json events = Json::array();
    for (const auto& e : s.events) {
      events.push_back({{"level", e.level},
                        {"improved", e.improved},
                        {"level_after", e.level_after},
                        {"perturbation_moves", e.perturbation_moves},
                        {"incumbent", e.incumbent},
                        {"candidate", e.candidate}});
    }
    starts.push_back({{"constructive_cost", s.constructive_cost},
                      {"after_local_search", s.after_local_search},
                      {"final_cost", s.final_cost},
                      {"rvnd_passes", s.rvnd.passes},
                      {"accepted_moves", accepted},
                      {"perturbation_moves", s.perturbation_moves},
                      {"events", events}});
  }
  return {{"starts", starts}, {"best_after_start", stats.best_after_start}, {"wall_seconds", stats.wall_seconds}};
}

struct IlsFlags {
  int iters = 3;
  int level_max = 7;
  int delay = 1;
  std::size_t sample_cap = 200;
  unsigned threads = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--iters", iters, "ILS starts (iter_max)")->capture_default_str();
    cmd->add_option("--level-max", level_max, "maximum perturbation level")->capture_default_str();
    cmd->add_option("--delay", delay, "d of the d-Delay neighborhood")->capture_default_str();
    cmd->add_option("--sample-cap", sample_cap, "moves examined per neighborhood pass")->capture_default_str();
    cmd->add_option("--threads", threads, "parallel starts (0 = FCHP_THREADS or all cores)");
  }

  IlsConfig config(std::uint64_t seed) const {
    IlsConfig c;
    c.iter_max = iters;
    c.level_max = level_max;
    c.delay_d = delay;
    c.move_sample_cap = sample_cap;
    c.threads = threads;
    c.seed = seed;
    return c;
  }

  Json to_json() const {
    return {{"iters", iters}, {"level_max", level_max}, {"delay", delay}, {"sample_cap", sample_cap}};
  }
};

int report_violations(const std::vector<Violation>& violations, std::ostream& err) {
  err << violations.size() << " feasibility violation(s):\n";
  for (const auto& v : violations) err << "  " << v.to_string() << '\n';
  return kDataError;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flash crowd handling: trace generation, instance building, solving and benchmarking", "fchp"};
  app.require_subcommand(1);

  // gen-trace
  std::string trace_config;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic flash crowd access trace (CSV)");
  gen->add_option("--config", trace_config, "trace config JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "overrides the config seed");
  gen->add_option("--out", out_path, "output CSV")->required();

  // make-instance
  std::string trace_path;
  std::string log_path;
  std::string servers_path;
  double step_secs = 1.0;
  double period_secs = 3600.0;
  int topk = 10;
  double rho = 2.0;
  auto* make = app.add_subcommand("make-instance", "build an instance from a trace or an access log");
  auto* trace_opt = make->add_option("--trace", trace_path, "trace CSV from gen-trace")->check(CLI::ExistingFile);
  auto* log_opt = make->add_option("--log", log_path, "access log CSV timestamp_seconds,content_id[,size_mb]")
                      ->check(CLI::ExistingFile);
  trace_opt->excludes(log_opt);
  make->add_option("--servers", servers_path, "server catalog JSON")->required()->check(CLI::ExistingFile);
  make->add_option("--step-secs", step_secs, "seconds per trace step")->capture_default_str();
  make->add_option("--period-secs", period_secs, "period length in seconds")->capture_default_str();
  make->add_option("--topk", topk, "contents kept per period")->capture_default_str();
  make->add_option("--rho", rho, "backlog penalty factor p = rho * c")->capture_default_str();
  make->add_option("--out", out_path, "output instance JSON")->required();

  // solve
  std::string instance_path;
  std::string method = "ils";
  std::int64_t node_limit = 5'000'000;
  IlsFlags ils_flags;
  auto* solve = app.add_subcommand("solve", "solve an instance");
  solve->add_option("--instance", instance_path, "instance JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "greedy, ils or exact")
      ->check(CLI::IsMember({"greedy", "ils", "exact"}))
      ->capture_default_str();
  ils_flags.attach(solve);
  solve->add_option("--seed", seed, "random seed (default 0)");
  solve->add_option("--node-limit", node_limit, "exact search budget")->capture_default_str();
  solve->add_option("--out", out_path, "output solution JSON")->required();

  // eval
  std::string solution_path;
  auto* eval = app.add_subcommand("eval", "check and cost a solution");
  eval->add_option("--instance", instance_path, "instance JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--solution", solution_path, "solution JSON")->required()->check(CLI::ExistingFile);

  // bench
  std::string suite_dir;
  std::string methods = "greedy,ils,exact,autoscale";
  std::string profile_path;
  int ils_runs = 3;
  std::int64_t bench_node_limit = 200'000;
  auto* bench_cmd = app.add_subcommand("bench", "run every method over a directory of instances");
  bench_cmd->add_option("--suite", suite_dir, "directory of instance JSON files")->required()->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--out", out_path, "results CSV")->required();
  bench_cmd->add_option("--methods", methods, "comma-separated subset of greedy,ils,exact,autoscale")
      ->capture_default_str();
  bench_cmd->add_option("--seed", seed, "master seed (default 1)");
  bench_cmd->add_option("--ils-runs", ils_runs, "ILS runs averaged per instance")->capture_default_str();
  bench_cmd->add_option("--node-limit", bench_node_limit, "exact search budget")->capture_default_str();
  bench_cmd->add_option("--profile", profile_path, "per-period profile CSV");
  auto* bench_ils = bench_cmd;
  int bench_iters = 3;
  int bench_level = 7;
  int bench_delay = 1;
  unsigned bench_threads = 0;
  bench_ils->add_option("--iters", bench_iters, "ILS starts")->capture_default_str();
  bench_ils->add_option("--level-max", bench_level, "maximum perturbation level")->capture_default_str();
  bench_ils->add_option("--delay", bench_delay, "d of d-Delay")->capture_default_str();
  bench_ils->add_option("--threads", bench_threads, "workers (0 = FCHP_THREADS or all cores)");

  // simulate
  std::string scenario_path;
  std::string policy = "ils";
  std::string instance_out;
  auto* sim = app.add_subcommand("simulate", "run a flash crowd scenario under ILS or the autoscale baseline");
  sim->add_option("--scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--policy", policy, "ils or autoscale")->check(CLI::IsMember({"ils", "autoscale"}))->capture_default_str();
  sim->add_option("--seed", seed, "overrides the scenario seed");
  ils_flags.attach(sim);
  sim->add_option("--out", out_path, "report JSON")->required();
  sim->add_option("--profile", profile_path, "per-period profile CSV");
  sim->add_option("--instance-out", instance_out, "also write the generated instance");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*gen) {
      auto cfg = trace::config_from_json(read_json_file(trace_config));
      if (seed) cfg.seed = *seed;
      const auto trace = trace::generate_trace(cfg);
      write_text_file(out_path, trace::to_csv(trace));
      Json m = meta("gen-trace");
      m["seed"] = cfg.seed;
      m["config"] = trace::to_json(cfg);
      write_json(out_path + ".meta.json", m);
      out << "wrote " << trace.rows.size() << " trace rows to " << out_path << '\n';
      return kOk;
    }

    if (*make) {
      if (trace_path.empty() == log_path.empty()) {
        err << "make-instance needs exactly one of --trace or --log\n" << make->help();
        return kUsage;
      }
      const auto catalog = bench::catalog_from_json(read_json_file(servers_path));
      std::vector<bench::PeriodCount> counts;
      std::map<std::string, double> log_sizes;
      if (!trace_path.empty()) {
        counts = bench::discretize_trace(trace::trace_from_csv(read_text(trace_path)), step_secs, period_secs, topk);
      } else {
        const auto log = bench::access_log_from_csv(read_text(log_path), log_path);
        for (const auto& e : log.entries) {
          if (e.size_mb) log_sizes[e.content_id] = *e.size_mb;
        }
        counts = bench::discretize_and_filter(log, period_secs, topk);
      }
      const auto inst = bench::build_instance(counts, catalog, period_secs, log_sizes, rho);
      Json j = to_json(inst);
      j["metadata"] = meta("make-instance");
      j["metadata"]["source"] = trace_path.empty() ? log_path : trace_path;
      j["metadata"]["period_secs"] = period_secs;
      j["metadata"]["topk"] = topk;
      write_json(out_path, j);
      out << "instance: " << inst.contents.size() << " contents, " << inst.requests.size() << " requests, "
          << inst.horizon << " periods\n";
      return kOk;
    }

    if (*solve) {
      const auto inst = load_instance(instance_path);
      const std::uint64_t s = seed.value_or(0);
      Json j = {{"metadata", meta("solve")}};
      j["metadata"]["method"] = method;
      j["metadata"]["seed"] = s;
      j["metadata"]["instance"] = instance_path;
      Solution solution;
      if (method == "greedy") {
        Rng rng(s);
        solution = construct_solution(inst, rng);
      } else if (method == "ils") {
        auto result = ils_solve(inst, ils_flags.config(s));
        j["metadata"]["ils"] = ils_flags.to_json();
        j["stats"] = stats_to_json(result.stats);
        solution = std::move(result.best);
      } else {
        ExactOptions eo;
        eo.node_limit = node_limit;
        auto result = exact_solve(inst, eo);
        j["metadata"]["node_limit"] = node_limit;
        j["proven"] = result.proven;
        j["nodes"] = result.nodes;
        solution = std::move(result.solution);
        if (!result.proven) err << "warning: node limit reached, the solution is not proven optimal\n";
      }
      const auto violations = check_feasibility(inst, solution);
      if (!violations.empty()) return report_violations(violations, err);
      const auto cost = evaluate(inst, solution);
      j["cost"] = to_json(cost);
      j["assignments"] = to_json(solution);
      write_json(out_path, j);
      out << method << " total=" << cost.total << " attend=" << cost.attend << " backlog=" << cost.backlog
          << " replication=" << cost.replication << " servers_od=" << cost.servers_od << '\n';
      return kOk;
    }

    if (*eval) {
      const auto inst = load_instance(instance_path);
      const auto solution = load_solution(solution_path);
      const auto violations = check_feasibility(inst, solution);
      if (!violations.empty()) return report_violations(violations, err);
      out << to_json(evaluate(inst, solution)).dump(2) << '\n';
      return kOk;
    }

    if (*bench_cmd) {
      bench::SuiteOptions opts;
      opts.methods.clear();
      std::stringstream list(methods);
      for (std::string m; std::getline(list, m, ',');) {
        if (!m.empty()) opts.methods.push_back(m);
      }
      opts.seed = seed.value_or(1);
      opts.ils_runs = ils_runs;
      opts.iter_max = bench_iters;
      opts.level_max = bench_level;
      opts.delay_d = bench_delay;
      opts.node_limit = bench_node_limit;
      opts.threads = bench_threads;
      const auto suite = bench::load_suite(suite_dir);
      const auto report = bench::run_suite(suite, opts);
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      write_text_file(out_path, bench::rows_to_csv(report.rows));
      if (!profile_path.empty()) write_text_file(profile_path, bench::profiles_to_csv(report.profiles));
      Json m = meta("bench");
      m["seed"] = opts.seed;
      m["methods"] = opts.methods;
      m["ils_runs"] = opts.ils_runs;
      m["node_limit"] = opts.node_limit;
      m["instances"] = Json::array();
      for (const auto& s : suite) m["instances"].push_back(s.label);
      write_json(out_path + ".meta.json", m);
      out << "wrote " << report.rows.size() << " rows to " << out_path << '\n';
      return kOk;
    }

    if (*sim) {
      auto cfg = bench::scenario_from_json(read_json_file(scenario_path));
      if (seed) cfg.seed = *seed;
      const auto inst = bench::build_scenario_instance(cfg);
      if (!instance_out.empty()) write_json(instance_out, to_json(inst));

      Json j = {{"metadata", meta("simulate")}};
      j["metadata"]["scenario"] = cfg.name;
      j["metadata"]["policy"] = policy;
      j["metadata"]["seed"] = cfg.seed;
      j["instance_shape"] = {{"contents", inst.contents.size()},
                             {"requests", inst.requests.size()},
                             {"periods", inst.horizon}};
      j["flash_contents"] = cfg.flash_contents();

      Solution solution;
      CostBreakdown cost;
      double fleet = 0.0;
      std::vector<std::string> cloud_contents;
      bench::PeriodProfile profile;
      if (policy == "ils") {
        auto result = ils_solve(inst, ils_flags.config(cfg.seed));
        j["metadata"]["ils"] = ils_flags.to_json();
        solution = std::move(result.best);
        cost = result.cost;
        fleet = bench::base_fleet_cost(inst) + cost.financial;
        cloud_contents = bench::contents_replicated_to_cloud(inst, solution);
        profile = bench::make_profile(inst, solution, cfg.name, policy);
      } else {
        auto result = bench::autoscale_simulate(inst, cfg.autoscale);
        solution = result.solution;
        cost = result.costs;
        fleet = result.fleet_financial;
        if (!result.hires.empty()) {
          for (const auto& c : inst.contents) cloud_contents.push_back(c.name);
          std::sort(cloud_contents.begin(), cloud_contents.end());
        }
        profile = bench::make_profile(result.instance, solution, cfg.name, policy);
        const auto origins = static_cast<int>(inst.servers_in(Pool::origin).size());
        for (std::size_t t = 0; t < result.active_servers.size(); ++t) {
          profile.cloud_active[t] = result.active_servers[t] - origins;
        }
        Json hires = Json::array();
        for (const auto& h : result.hires) hires.push_back({{"first", h.first}, {"last", h.last}});
        j["hires"] = hires;
      }
      j["cost"] = to_json(cost);
      j["fleet_financial"] = fleet;
      j["cloud_contents"] = cloud_contents;
      j["assignments"] = to_json(solution);
      write_json(out_path, j);
      if (!profile_path.empty()) write_text_file(profile_path, bench::profiles_to_csv({profile}));
      out << cfg.name << " " << policy << ": total=" << cost.total << " servers_od=" << cost.servers_od
          << " fleet_financial=" << fleet << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace fchp::cli
