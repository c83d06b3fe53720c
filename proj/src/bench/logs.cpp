#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fchp/bench.hpp"
#include "fchp/errors.hpp"

namespace fchp::bench {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("access log line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
}

std::vector<PeriodCount> top_k(std::map<int, std::map<std::string, int>> buckets, int k) {
  std::vector<PeriodCount> out;
  for (auto& [period, by_content] : buckets) {
    std::vector<std::pair<std::string, int>> ranked(by_content.begin(), by_content.end());
    // map order already gives the lexicographic tie-break
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
    std::sort(ranked.begin(), ranked.end());
    for (auto& [content, count] : ranked) out.push_back({period, content, count});
  }
  return out;
}

Pool pool_named(const std::string& s) {
  if (s == "origin") return Pool::origin;
  if (s == "cloud") return Pool::cloud;
  throw ParseError("unknown server pool '" + s + "'");
}

}  // namespace

AccessLog access_log_from_csv(const std::string& text, std::string source) {
  AccessLog log;
  log.source = std::move(source);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("timestamp", 0) == 0) continue;
    const auto f = split_csv(line);
    if (f.size() < 2 || f.size() > 3 || f[1].empty()) {
      throw ParseError("access log line " + std::to_string(lineno) + ": expected timestamp,content[,size_mb]");
    }
    LogEntry e;
    e.timestamp_seconds = parse_number(f[0], lineno);
    if (e.timestamp_seconds < 0) throw ParseError("access log line " + std::to_string(lineno) + ": negative timestamp");
    e.content_id = f[1];
    if (f.size() == 3 && !f[2].empty()) e.size_mb = parse_number(f[2], lineno);
    log.entries.push_back(std::move(e));
  }
  std::stable_sort(log.entries.begin(), log.entries.end(), [](const LogEntry& a, const LogEntry& b) {
    return a.timestamp_seconds < b.timestamp_seconds;
  });
  return log;
}

std::vector<PeriodCount> discretize_and_filter(const AccessLog& log, double period_seconds, int top_k_contents) {
  if (top_k_contents < 1) throw DomainError("top_k must be >= 1");
  if (!(period_seconds > 0)) throw DomainError("period_seconds must be > 0");
  std::map<int, std::map<std::string, int>> buckets;
  for (const auto& e : log.entries) {
    ++buckets[static_cast<int>(std::floor(e.timestamp_seconds / period_seconds))][e.content_id];
  }
  return top_k(std::move(buckets), top_k_contents);
}

std::vector<PeriodCount> discretize_trace(const trace::Trace& trace, double step_seconds,
                                          double period_seconds, int top_k_contents) {
  if (top_k_contents < 1) throw DomainError("top_k must be >= 1");
  if (!(period_seconds > 0) || !(step_seconds > 0)) throw DomainError("step and period must be > 0");
  std::map<int, std::map<std::string, int>> buckets;
  for (const auto& r : trace.rows) {
    if (r.access_count <= 0) continue;
    const int period = static_cast<int>(std::floor(r.time_step * step_seconds / period_seconds));
    buckets[period][r.content_id] += r.access_count;
  }
  return top_k(std::move(buckets), top_k_contents);
}

std::vector<ServerSpec> Catalog::expand() const {
  std::vector<ServerSpec> out;
  for (const auto& t : types) {
    for (int n = 0; n < t.count; ++n) {
      ServerSpec s;
      s.id = server_id(out.size());
      s.name = t.count == 1 ? t.name : t.name + "-" + std::to_string(n + 1);
      s.pool = t.pool;
      s.storage_mb = t.storage_mb;
      s.bandwidth_mb = t.bandwidth_mb;
      s.price_per_period = t.price_per_period;
      out.push_back(std::move(s));
    }
  }
  return out;
}

const ServerType* Catalog::find_type(const std::string& name) const {
  for (const auto& t : types) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

Catalog catalog_from_json(const nlohmann::json& j) {
  try {
    Catalog c;
    for (const auto& s : j.at("servers")) {
      ServerType t;
      t.name = s.at("name").get<std::string>();
      t.pool = pool_named(s.value("pool", std::string("origin")));
      t.storage_mb = s.at("storage_mb").get<double>();
      t.bandwidth_mb = s.at("bandwidth_mb").get<double>();
      t.price_per_period = s.value("price_per_period", 0.0);
      t.count = s.value("count", 1);
      if (t.count < 0) throw ParseError("server type '" + t.name + "' has a negative count");
      c.types.push_back(std::move(t));
    }
    if (j.contains("content_sizes")) {
      for (const auto& [name, size] : j.at("content_sizes").items()) c.content_sizes[name] = size.get<double>();
    }
    if (j.contains("default_content_size_mb")) c.default_content_size_mb = j.at("default_content_size_mb").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed server catalog: ") + e.what());
  }
}

nlohmann::json to_json(const Catalog& catalog) {
  nlohmann::json servers = nlohmann::json::array();
  for (const auto& t : catalog.types) {
    servers.push_back({{"name", t.name},
                       {"pool", to_string(t.pool)},
                       {"storage_mb", t.storage_mb},
                       {"bandwidth_mb", t.bandwidth_mb},
                       {"price_per_period", t.price_per_period},
                       {"count", t.count}});
  }
  nlohmann::json out = {{"servers", servers}, {"content_sizes", catalog.content_sizes}};
  if (catalog.default_content_size_mb) out["default_content_size_mb"] = *catalog.default_content_size_mb;
  return out;
}

Instance build_instance(const std::vector<PeriodCount>& counts, const Catalog& catalog,
                        double period_seconds, const std::map<std::string, double>& log_sizes,
                        double backlog_rho) {
  std::size_t total = 0;
  for (const auto& c : counts) total += static_cast<std::size_t>(std::max(c.count, 0));
  if (total == 0) throw EmptyInstance("no counted accesses to build an instance from");

  Instance inst;
  inst.period_seconds = period_seconds;
  inst.servers = catalog.expand();
  const auto origins = inst.servers_in(Pool::origin);
  if (origins.empty()) throw InvalidInstance("server catalog has no origin server");

  std::set<std::string> names;
  int last_period = 0;
  for (const auto& c : counts) {
    if (c.count <= 0) continue;
    if (c.period < 0) throw DomainError("negative period in counts");
    names.insert(c.content_id);
    last_period = std::max(last_period, c.period);
  }
  inst.horizon = last_period + 1;

  std::map<std::string, ContentId> ids;
  for (const auto& name : names) {
    Content content;
    content.id = content_id(inst.contents.size());
    content.name = name;
    if (auto it = catalog.content_sizes.find(name); it != catalog.content_sizes.end()) {
      content.size_mb = it->second;
    } else if (auto jt = log_sizes.find(name); jt != log_sizes.end()) {
      content.size_mb = jt->second;
    } else if (catalog.default_content_size_mb) {
      content.size_mb = *catalog.default_content_size_mb;
    } else {
      throw InvalidInstance("no size known for content '" + name + "'");
    }
    content.origin_server = origins.front();
    content.preload.assign(origins.begin() + 1, origins.end());
    ids.emplace(name, content.id);
    inst.contents.push_back(std::move(content));
  }

  auto ordered = counts;
  std::stable_sort(ordered.begin(), ordered.end(), [](const PeriodCount& a, const PeriodCount& b) {
    return std::tie(a.period, a.content_id) < std::tie(b.period, b.content_id);
  });
  for (const auto& c : ordered) {
    for (int n = 0; n < c.count; ++n) {
      inst.requests.push_back({request_id(inst.requests.size()), ids.at(c.content_id), c.period});
    }
  }
  inst.costs.backlog_rho = backlog_rho;
  inst.apply_default_costs();
  inst.validate();
  return inst;
}

}  // namespace fchp::bench
