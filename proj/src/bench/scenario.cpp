#include <algorithm>
#include <cmath>
#include <set>

#include "fchp/bench.hpp"
#include "fchp/errors.hpp"
#include "fchp/rng.hpp"
#include "fchp/timeline.hpp"

namespace fchp::bench {

std::vector<std::string> ScenarioConfig::flash_contents() const {
  std::vector<std::string> out;
  for (const auto& p : trace.plans) {
    if (p.flash) out.push_back(p.content_id);
  }
  return out;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig cfg;
    cfg.name = j.value("name", std::string("scenario"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.period_seconds = j.value("period_seconds", 60.0);
    cfg.horizon = j.value("horizon", 60);
    cfg.target_requests = j.value("target_requests", 0);
    cfg.backlog_rho = j.value("backlog_rho", 2.0);
    for (const auto& c : j.at("contents")) {
      cfg.contents.push_back({c.at("name").get<std::string>(), c.at("size_mb").get<double>()});
    }
    cfg.trace = trace::config_from_json(j.at("trace"));
    cfg.catalog = catalog_from_json(j.at("catalog"));

    const auto& a = j.at("autoscale");
    cfg.autoscale.up_threshold = a.value("up_threshold", 0.8);
    cfg.autoscale.down_threshold = a.value("down_threshold", 0.3);
    cfg.autoscale.cooldown_periods = a.value("cooldown_periods", 1);
    const auto type_name = a.at("machine_type").get<std::string>();
    const auto* type = cfg.catalog.find_type(type_name);
    if (type == nullptr) throw ParseError("autoscale machine type '" + type_name + "' is not in the catalog");
    cfg.autoscale.machine_type.name = type->name;
    cfg.autoscale.machine_type.pool = Pool::cloud;
    cfg.autoscale.machine_type.storage_mb = type->storage_mb;
    cfg.autoscale.machine_type.bandwidth_mb = type->bandwidth_mb;
    cfg.autoscale.machine_type.price_per_period = type->price_per_period;
    cfg.autoscale.validate();

    if (cfg.target_requests < 0) throw ParseError("target_requests must be >= 0");
    for (const auto& p : cfg.trace.plans) {
      const bool known = std::any_of(cfg.contents.begin(), cfg.contents.end(),
                                     [&](const ScenarioContent& c) { return c.name == p.content_id; });
      if (!known) throw ParseError("trace plan '" + p.content_id + "' names no scenario content");
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what());
  }
}

Instance build_scenario_instance(const ScenarioConfig& config) {
  auto trace_cfg = config.trace;
  trace_cfg.seed = derive_seed(config.seed, 0);
  const auto generated = trace::generate_trace(trace_cfg);

  Instance inst;
  inst.horizon = config.horizon;
  inst.period_seconds = config.period_seconds;
  inst.servers = config.catalog.expand();
  const auto origins = inst.servers_in(Pool::origin);
  if (origins.empty()) throw InvalidInstance("scenario catalog has no origin server");
  for (const auto& c : config.contents) {
    Content content;
    content.id = content_id(inst.contents.size());
    content.name = c.name;
    content.size_mb = c.size_mb;
    content.origin_server = origins.front();
    content.preload.assign(origins.begin() + 1, origins.end());
    inst.contents.push_back(std::move(content));
  }
  auto content_named = [&](const std::string& name) {
    for (const auto& c : inst.contents) {
      if (c.name == name) return c.id;
    }
    throw BrokenReference("trace names unknown content '" + name + "'");
  };

  // one entry per generated access, in trace order
  std::vector<std::pair<int, ContentId>> accesses;
  for (const auto& row : generated.rows) {
    if (row.access_count <= 0) continue;
    const int period = static_cast<int>(
        std::floor(row.time_step * trace_cfg.step_seconds / config.period_seconds));
    if (period >= config.horizon) throw DomainError("scenario trace runs past the horizon");
    const ContentId k = content_named(row.content_id);
    for (int n = 0; n < row.access_count; ++n) accesses.emplace_back(period, k);
  }

  std::vector<std::size_t> keep(accesses.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  const auto target = static_cast<std::size_t>(config.target_requests);
  if (target > 0 && target < keep.size()) {
    Rng rng(derive_seed(config.seed, 1));
    for (std::size_t i = 0; i < target; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(keep.size() - i));
      std::swap(keep[i], keep[j]);
    }
    keep.resize(target);
    std::sort(keep.begin(), keep.end());
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(accesses[a].first, idx(accesses[a].second)) <
           std::make_pair(accesses[b].first, idx(accesses[b].second));
  });
  for (auto i : keep) {
    inst.requests.push_back({request_id(inst.requests.size()), accesses[i].second, accesses[i].first});
  }
  if (inst.requests.empty()) throw EmptyInstance("scenario generated no requests");

  inst.costs.backlog_rho = config.backlog_rho;
  inst.apply_default_costs();
  inst.validate();
  return inst;
}

std::vector<std::string> contents_replicated_to_cloud(const Instance& instance, const Solution& solution) {
  const auto timeline = derive_timeline(instance, solution);
  std::set<std::string> names;
  for (const auto& e : timeline.copy_events) {
    if (instance.server(e.destination).pool == Pool::cloud) names.insert(instance.content(e.content).name);
  }
  return {names.begin(), names.end()};
}

}  // namespace fchp::bench
