#include "fchp/io.hpp"

#include <fstream>
#include <sstream>

#include "fchp/errors.hpp"

namespace fchp {

namespace {

Pool pool_from_string(const std::string& s) {
  if (s == "origin") return Pool::origin;
  if (s == "cloud") return Pool::cloud;
  throw ParseError("unknown server pool '" + s + "'");
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

Instance instance_from_json(const Json& j) {
  try {
    Instance inst;
    inst.horizon = required<int>(j, "horizon");
    inst.period_seconds = j.value("period_seconds", 3600.0);

    for (const auto& s : required<Json>(j, "servers")) {
      ServerSpec spec;
      spec.id = server_id(required<std::size_t>(s, "id"));
      spec.name = s.value("name", "server-" + std::to_string(idx(spec.id)));
      spec.pool = pool_from_string(required<std::string>(s, "pool"));
      spec.storage_mb = required<double>(s, "storage_mb");
      spec.bandwidth_mb = required<double>(s, "bandwidth_mb");
      spec.price_per_period = s.value("price_per_period", 0.0);
      inst.servers.push_back(std::move(spec));
    }
    for (const auto& c : required<Json>(j, "contents")) {
      Content content;
      content.id = content_id(required<std::size_t>(c, "id"));
      content.name = c.value("name", std::to_string(idx(content.id)));
      content.size_mb = required<double>(c, "size_mb");
      content.start_period = c.value("start_period", 0);
      content.origin_server = server_id(required<std::size_t>(c, "origin_server"));
      for (auto p : c.value("preload", std::vector<std::size_t>{})) content.preload.push_back(server_id(p));
      inst.contents.push_back(std::move(content));
    }
    for (const auto& r : required<Json>(j, "requests")) {
      Request req;
      req.id = request_id(required<std::size_t>(r, "id"));
      req.content = content_id(required<std::size_t>(r, "content"));
      req.arrival_period = required<int>(r, "arrival");
      inst.requests.push_back(req);
    }

    if (j.contains("costs")) {
      const auto& c = j.at("costs");
      inst.costs.attend = c.value("attend", std::vector<double>{});
      inst.costs.copy = c.value("copy", std::vector<double>{});
      inst.costs.backlog_rho = c.value("backlog_rho", 2.0);
      inst.costs.client_bandwidth_mb = c.value("client_bandwidth_mb", 60.0);
      inst.costs.replication_bandwidth_mb = c.value("replication_bandwidth_mb", 600.0);
      for (const auto& o : c.value("backlog_overrides", Json::array())) {
        inst.costs.backlog_overrides.push_back({request_id(required<std::size_t>(o, "request")),
                                                required<int>(o, "period"),
                                                required<double>(o, "penalty")});
      }
    }
    inst.apply_default_costs();
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance: ") + e.what());
  }
}

Json to_json(const Instance& inst) {
  Json servers = Json::array();
  for (const auto& s : inst.servers) {
    servers.push_back({{"id", idx(s.id)},
                       {"name", s.name},
                       {"pool", to_string(s.pool)},
                       {"storage_mb", s.storage_mb},
                       {"bandwidth_mb", s.bandwidth_mb},
                       {"price_per_period", s.price_per_period}});
  }
  Json contents = Json::array();
  for (const auto& c : inst.contents) {
    Json preload = Json::array();
    for (auto p : c.preload) preload.push_back(idx(p));
    contents.push_back({{"id", idx(c.id)},
                        {"name", c.name},
                        {"size_mb", c.size_mb},
                        {"start_period", c.start_period},
                        {"origin_server", idx(c.origin_server)},
                        {"preload", preload}});
  }
  Json requests = Json::array();
  for (const auto& r : inst.requests) {
    requests.push_back({{"id", idx(r.id)}, {"content", idx(r.content)}, {"arrival", r.arrival_period}});
  }
  Json overrides = Json::array();
  for (const auto& o : inst.costs.backlog_overrides) {
    overrides.push_back({{"request", idx(o.request)}, {"period", o.period}, {"penalty", o.penalty}});
  }
  return {{"horizon", inst.horizon},
          {"period_seconds", inst.period_seconds},
          {"servers", servers},
          {"contents", contents},
          {"requests", requests},
          {"costs",
           {{"attend", inst.costs.attend},
            {"copy", inst.costs.copy},
            {"backlog_rho", inst.costs.backlog_rho},
            {"backlog_overrides", overrides},
            {"client_bandwidth_mb", inst.costs.client_bandwidth_mb},
            {"replication_bandwidth_mb", inst.costs.replication_bandwidth_mb}}}};
}

Solution solution_from_json(const Json& j) {
  try {
    const Json& list = j.is_array() ? j : required<Json>(j, "assignments");
    Solution sol;
    for (const auto& a : list) {
      Assignment as;
      as.content = content_id(required<std::size_t>(a, "content"));
      as.server = server_id(required<std::size_t>(a, "server"));
      as.period = required<int>(a, "period");
      for (auto r : required<std::vector<std::size_t>>(a, "requests")) as.requests.push_back(request_id(r));
      sol.assignments.push_back(std::move(as));
    }
    return sol;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed solution: ") + e.what());
  }
}

Json to_json(const Solution& sol) {
  Json list = Json::array();
  for (const auto& a : sol.assignments) {
    std::vector<std::size_t> reqs;
    for (auto r : a.requests) reqs.push_back(idx(r));
    list.push_back({{"content", idx(a.content)}, {"server", idx(a.server)}, {"requests", reqs}, {"period", a.period}});
  }
  return list;
}

Json to_json(const CostBreakdown& c) {
  return {{"total", c.total},       {"attend", c.attend},         {"backlog", c.backlog},
          {"replication", c.replication}, {"servers_od", c.servers_od}, {"financial", c.financial}};
}

Json to_json(const Violation& v) {
  Json out = {{"rule", to_string(v.rule)}, {"text", v.to_string()}};
  if (v.server) out["server"] = *v.server;
  if (v.content) out["content"] = *v.content;
  if (v.request) out["request"] = *v.request;
  if (v.period) out["period"] = *v.period;
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

Solution load_solution(const std::filesystem::path& path) {
  return solution_from_json(read_json_file(path));
}

}  // namespace fchp
